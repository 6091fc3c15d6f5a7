"""Loop-group restriction: single-index moments, matrix Laurent polynomials, Birkhoff.

A loop element ``I + sum_{a>b} gamma_ab(z) E_ab`` with
``gamma_ab(z) = sum_m gamma_{ab,m} z^(-m-1)`` multiplies ``e_b z^l`` into
``e_b z^l + sum_m gamma_{ab,m} e_a z^(l-m-1)``.  In the infinite matrix
picture this is the array ``b_{i,j} = gamma_{i+j}`` on all of Z^2, so every
computation here happens on a finite window of that array, sized so that
the answer no longer depends on the window.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

from .algebra import ONE, ZERO, LaurentPoly, Scalar, det, num_den, to_scalar
from .conditions import ArrayFormatError, CoefficientArray, block_pairs, pair_name, parse_pair
from . import matgroup


class NoBirkhoff(ArithmeticError):
    """No factorization with trivial diagonal part: the tau function vanishes."""


class NotAntiDiagonal(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QCoefficients:
    """Per-block single-index moments ``gamma_m``."""

    n: int
    blocks: Mapping

    def __post_init__(self):
        clean = {p: {} for p in block_pairs(self.n)}
        for block, entries in dict(self.blocks).items():
            block = parse_pair(block)
            if block not in clean:
                raise ValueError(f"block {block} is not strictly lower for n={self.n}")
            for m, v in dict(entries).items():
                v = to_scalar(v)
                if v:
                    clean[block][int(m)] = v
        object.__setattr__(self, "blocks", clean)

    @cached_property
    def _key(self):
        return (self.n, tuple((b, tuple(sorted(e.items()))) for b, e in sorted(self.blocks.items())))

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, QCoefficients) and self._key == other._key

    def __repr__(self):
        return f"QCoefficients(n={self.n}, {[(pair_name(b), len(e)) for b, e in sorted(self.blocks.items())]})"

    def span(self) -> tuple[int, int]:
        ms = [m for e in self.blocks.values() for m in e]
        return (min(ms), max(ms)) if ms else (0, 0)

    def shifted(self, shift_vector: Sequence[int]) -> "QCoefficients":
        """Moments of ``Qbar^s g Qbar^-s``: block ``(a,b)`` picks up ``z^(s_b - s_a)``."""
        out = {}
        for (a, b), e in self.blocks.items():
            d = shift_vector[b] - shift_vector[a]
            out[(a, b)] = {m - d: v for m, v in e.items()}
        return QCoefficients(self.n, out)

    def to_json_obj(self) -> dict:
        blocks = []
        for block in sorted(self.blocks):
            rows = []
            for m, v in sorted(self.blocks[block].items()):
                num, den = num_den(v)
                rows.append({"m": m, "num": num, "den": den})
            blocks.append({"pair": pair_name(block), "entries": rows})
        return {"n": self.n, "loop": True, "blocks": blocks}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2) + "\n"

    @classmethod
    def from_json_obj(cls, obj) -> "QCoefficients":
        try:
            if not obj.get("loop"):
                raise ArrayFormatError("not a loop coefficient file")
            n = obj["n"]
            if not isinstance(n, int) or n < 2:
                raise ArrayFormatError(f"bad component count {n!r}")
            blocks = {}
            for blk in obj["blocks"]:
                pair = parse_pair(blk["pair"])
                if not (n > pair[0] > pair[1] >= 0):
                    raise ArrayFormatError(f"pair {blk['pair']} not strictly lower")
                ent = {}
                for e in blk["entries"]:
                    vals = [e["m"], e["num"], e["den"]]
                    if not all(isinstance(x, int) and not isinstance(x, bool) for x in vals) or e["den"] == 0:
                        raise ArrayFormatError(f"bad entry {e}")
                    ent[e["m"]] = Scalar(e["num"], e["den"])
                blocks[pair] = ent
        except (KeyError, TypeError, AttributeError) as exc:
            raise ArrayFormatError(f"malformed loop file: {exc}") from exc
        return cls(n, blocks)

    @classmethod
    def from_json(cls, text: str) -> "QCoefficients":
        try:
            return cls.from_json_obj(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ArrayFormatError(str(exc)) from exc


def random_q(n: int, seed: int, length: int = 4, num_range: int = 9, den_range: int = 4) -> QCoefficients:
    rng = random.Random(seed)
    blocks = {}
    for block in block_pairs(n):
        blocks[block] = {m: Scalar(rng.randint(-num_range, num_range), rng.randint(1, den_range)) for m in range(length)}
    return QCoefficients(n, blocks)


def _box(box) -> tuple[int, int, int, int]:
    if isinstance(box, int):
        return (-box, box, -box, box)
    if len(box) == 2:
        return (0, box[0] - 1, 0, box[1] - 1)
    return tuple(box)


def lift(q: QCoefficients, box=None) -> CoefficientArray:
    """Anti-diagonal array ``b_{i,j} = gamma_{i+j}`` on an inclusive box.

    ``box`` is ``(imin, imax, jmin, jmax)``, a pair ``(rows, cols)`` for
    ``[0, rows) x [0, cols)``, or an int ``B`` for ``[-B, B]^2``.  The
    default is the smallest nonnegative square holding every moment.
    """
    if box is None:
        hi = q.span()[1]
        box = (0, max(hi, 0), 0, max(hi, 0))
    imin, imax, jmin, jmax = _box(box)
    blocks = {}
    for block, e in q.blocks.items():
        ent = {}
        for i in range(imin, imax + 1):
            for j in range(jmin, jmax + 1):
                v = e.get(i + j)
                if v:
                    ent[(i, j)] = v
        blocks[block] = ent
    return CoefficientArray(q.n, blocks)


def restrict(arr: CoefficientArray) -> QCoefficients:
    """Inverse of :func:`lift` on arrays constant along anti-diagonals."""
    blocks = {}
    for block, e in arr.blocks.items():
        box = arr.support_box(block)
        gam: dict = {}
        if box is not None:
            imin, imax, jmin, jmax = box
            for i in range(imin, imax + 1):
                for j in range(jmin, jmax + 1):
                    v = e.get((i, j), ZERO)
                    m = i + j
                    if m in gam and gam[m] != v:
                        raise NotAntiDiagonal(f"block {pair_name(block)} varies along anti-diagonal {m}")
                    gam[m] = v
        blocks[block] = gam
    return QCoefficients(arr.n, blocks)


def loop_window(q: QCoefficients, k_vector: Sequence[int], shift_vector: Sequence[int]) -> int:
    lo, hi = q.shifted(shift_vector).span()
    return max(abs(lo), abs(hi)) + 2 * sum(abs(k) for k in k_vector) + 4


def window_array(q: QCoefficients, shift_vector: Sequence[int], K: int) -> CoefficientArray:
    """The shifted loop element cut to the window ``[-K, K)``."""
    return lift(q.shifted(shift_vector), (-K, K - 1, -K, K - 1))


@lru_cache(maxsize=8192)
def loop_tau(q: QCoefficients, k_vector: tuple, shift_vector: tuple, K: int | None = None) -> Scalar:
    """``tau_k`` of the shifted loop element, as a minor on a window."""
    k_vector, shift_vector = tuple(k_vector), tuple(shift_vector)
    if any(k < 0 for k in k_vector):
        return ZERO
    if K is None:
        K = loop_window(q, k_vector, shift_vector)
    arr = window_array(q, shift_vector, K)
    return matgroup.tau_minor(arr, k_vector, None, K)


def hankel_loop(q: QCoefficients, k: int, a: int) -> Scalar:
    """Two-component loop tau function ``det[gamma_{a+i+j}]``."""
    if q.n != 2:
        raise ValueError("needs two components")
    if k < 0:
        return ZERO
    g = q.blocks[(1, 0)]
    return det([[g.get(a + i + j, ZERO) for j in range(k)] for i in range(k)])


# ---------------------------------------------------------------------------
# matrix Laurent polynomials


Z = ("z",)


def _lp(coeffs: Mapping[int, Scalar]) -> LaurentPoly:
    return LaurentPoly(Z, {(p,): v for p, v in coeffs.items()})


def _coeffs(p: LaurentPoly) -> dict:
    return {e[0]: v for e, v in p.terms.items()}


@dataclass(frozen=True)
class LaurentMatrix:
    """Square matrix of Laurent polynomials in ``z``."""

    n: int
    entries: tuple  # tuple of row tuples of LaurentPoly

    @classmethod
    def from_coeffs(cls, n: int, coeffs: Mapping) -> "LaurentMatrix":
        """``coeffs[(a, b)]`` is ``{power: value}``."""
        rows = tuple(tuple(_lp(coeffs.get((a, b), {})) for b in range(n)) for a in range(n))
        return cls(n, rows)

    @classmethod
    def identity(cls, n: int) -> "LaurentMatrix":
        return cls.from_coeffs(n, {(a, a): {0: ONE} for a in range(n)})

    def coeffs(self, a: int, b: int) -> dict:
        return _coeffs(self.entries[a][b])

    def __getitem__(self, ab):
        return self.entries[ab[0]][ab[1]]

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        n = self.n
        rows = []
        for a in range(n):
            row = []
            for b in range(n):
                acc: dict = {}
                for c in range(n):
                    for p, u in self.coeffs(a, c).items():
                        for q_, v in other.coeffs(c, b).items():
                            acc[p + q_] = acc.get(p + q_, ZERO) + u * v
                row.append(_lp(acc))
            rows.append(tuple(row))
        return LaurentMatrix(n, tuple(rows))

    def __eq__(self, other):
        return isinstance(other, LaurentMatrix) and self.n == other.n and all(
            self.entries[a][b] == other.entries[a][b] for a in range(self.n) for b in range(self.n)
        )

    def degree_range(self) -> tuple[int, int]:
        ps = [p for a in range(self.n) for b in range(self.n) for p in self.coeffs(a, b)]
        return (min(ps), max(ps)) if ps else (0, 0)

    def coefficient_matrix(self, power: int) -> list[list[Scalar]]:
        return [[self.coeffs(a, b).get(power, ZERO) for b in range(self.n)] for a in range(self.n)]

    def is_nonnegative(self) -> bool:
        return self.degree_range()[0] >= 0 or all(
            p >= 0 for a in range(self.n) for b in range(self.n) for p in self.coeffs(a, b)
        )

    def adjugate(self) -> "LaurentMatrix":
        n = self.n
        rows = []
        for a in range(n):
            row = []
            for b in range(n):
                minor = [[self.entries[r][c] for c in range(n) if c != a] for r in range(n) if r != b]
                val = _lp_det(minor) if minor else _lp({0: ONE})
                row.append(val if (a + b) % 2 == 0 else -val)
            rows.append(tuple(row))
        return LaurentMatrix(n, tuple(rows))

    def det(self) -> LaurentPoly:
        return _lp_det([list(r) for r in self.entries])


def _lp_det(rows) -> LaurentPoly:
    size = len(rows)
    if size == 1:
        return rows[0][0]
    total = _lp({})
    for c in range(size):
        if rows[0][c].is_zero():
            continue
        minor = [[rows[r][cc] for cc in range(size) if cc != c] for r in range(1, size)]
        term = rows[0][c] * _lp_det(minor)
        total = total + term if c % 2 == 0 else total - term
    return total


def loop_matrix(q: QCoefficients, shift_vector: Sequence[int] | None = None, k_vector: Sequence[int] | None = None) -> LaurentMatrix:
    """``T^{-k} g^{(shift)}`` as a matrix Laurent polynomial."""
    n = q.n
    shift_vector = tuple(shift_vector or (0,) * n)
    k_vector = tuple(k_vector or (0,) * (n - 1))
    s = matgroup.power_shifts(n, k_vector)
    sq = q.shifted(shift_vector)
    coeffs = {(a, a): {s[a]: ONE} for a in range(n)}
    for (a, b), e in sq.blocks.items():
        coeffs[(a, b)] = {s[a] - m - 1: v for m, v in e.items()}
    return LaurentMatrix.from_coeffs(n, coeffs)


def embedding_array(m: LaurentMatrix, K: int) -> tuple[CoefficientArray, tuple[int, ...]]:
    """Split ``m = diag(z^s) g`` and cut ``g - I`` to the window as an array.

    ``m`` must be lower triangular with monic monomial diagonal; returns the
    array and the translation vector ``k`` with ``T^{-k} = diag(z^s)``.
    """
    n = m.n
    s = []
    for a in range(n):
        d = m.coeffs(a, a)
        if len(d) != 1 or next(iter(d.values())) != 1:
            raise ValueError("diagonal entries must be monic monomials")
        s.append(next(iter(d)))
        for b in range(a + 1, n):
            if m.coeffs(a, b):
                raise ValueError("matrix must be lower triangular")
    if sum(s):
        raise ValueError("determinant must be 1")
    k = []
    acc = 0
    for a in range(n - 1):
        acc -= s[a]
        k.append(acc)
    blocks = {}
    for a in range(n):
        for b in range(a):
            ent = {}
            for p, v in m.coeffs(a, b).items():
                p -= s[a]  # power of g_ab
                for j in range(-K, K):
                    target = j + p
                    if -K <= target < K:
                        ent[(-target - 1, j)] = v
            blocks[(a, b)] = ent
    return CoefficientArray(n, blocks), tuple(k)


def _g_minus_from_x(n: int, x: dict) -> LaurentMatrix:
    coeffs: dict = {(a, a): {0: ONE} for a in range(n)}
    for ((a, p), (b, j)), v in x.items():
        if j == 0:
            coeffs.setdefault((a, b), {})[p] = v
    return LaurentMatrix.from_coeffs(n, coeffs)


def birkhoff_embedded(m: LaurentMatrix, K: int | None = None) -> tuple[LaurentMatrix, LaurentMatrix]:
    """Birkhoff factors read off the Gauss factorization of the window truncation."""
    lo, hi = m.degree_range()
    if K is None:
        K = 2 * (hi - lo) + 6
    arr, k = embedding_array(m, K)
    try:
        gp = matgroup.gauss_factorize(matgroup.build_group_element(arr, None, k, K))
    except matgroup.SingularBlock as exc:
        raise NoBirkhoff(str(exc)) from exc
    g_minus = _g_minus_from_x(m.n, gp.x)
    g_plus = g_minus.adjugate() @ m
    return g_minus, g_plus


def birkhoff_factorize(m: LaurentMatrix, method: str = "direct", max_degree: int | None = None) -> tuple[LaurentMatrix, LaurentMatrix]:
    """``m = g_minus g_plus`` with ``g_minus = I + O(1/z)`` and ``g_plus`` polynomial.

    The direct route finds the polynomial ``P`` with ``m P = I + O(1/z)``.
    ``P`` is ``g_plus^-1``; it is unique when it exists, and its degree is
    searched upward.  Then ``g_minus = m P`` and ``g_plus = adj(P)`` (both
    factors have determinant 1).  ``method="embedded"`` goes through the
    window truncation instead (:func:`birkhoff_embedded`).
    """
    if method == "embedded":
        return birkhoff_embedded(m)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    n = m.n
    lo, hi = m.degree_range()
    if max_degree is None:
        max_degree = n * (hi - lo + 1) + 2
    for D in range(0, max_degree + 1):
        P = _solve_plus_inverse(m, D)
        if P is not None:
            g_minus = m @ P
            lo_m, hi_m = g_minus.degree_range()
            if hi_m > 0 or g_minus.coefficient_matrix(0) != LaurentMatrix.identity(n).coefficient_matrix(0):
                continue
            g_plus = P.adjugate()
            return g_minus, g_plus
    raise NoBirkhoff("no polynomial right factor up to the degree bound")


def _solve_plus_inverse(m: LaurentMatrix, D: int) -> LaurentMatrix | None:
    """Solve ``(m P)_p = delta_{p,0} I`` for powers ``p >= 0``; None if inconsistent."""
    n = m.n
    lo, hi = m.degree_range()
    powers = range(0, hi + D + 1)
    # unknown index: (c, d) -> row c of P_d, for each output column b separately
    unknowns = [(c, d) for d in range(D + 1) for c in range(n)]
    uidx = {u: i for i, u in enumerate(unknowns)}
    cols = {}
    for b in range(n):
        rows = []
        rhs = []
        for p in powers:
            for a in range(n):
                row = [ZERO] * len(unknowns)
                for c in range(n):
                    mc = m.coeffs(a, c)
                    for d in range(D + 1):
                        v = mc.get(p - d)
                        if v:
                            row[uidx[(c, d)]] += v
                rows.append(row)
                rhs.append(ONE if (p == 0 and a == b) else ZERO)
        sol = _solve_consistent(rows, rhs)
        if sol is None:
            return None
        cols[b] = sol
    coeffs: dict = {}
    for b in range(n):
        for (c, d), i in uidx.items():
            v = cols[b][i]
            if v:
                coeffs.setdefault((c, b), {})[d] = v
    return LaurentMatrix.from_coeffs(n, coeffs)


def _solve_consistent(rows: list[list[Scalar]], rhs: list[Scalar]) -> list[Scalar] | None:
    """Unique solution of an overdetermined system, or None."""
    width = len(rows[0]) if rows else 0
    aug = [r[:] + [v] for r, v in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(width):
        p = next((i for i in range(r, len(aug)) if aug[i][c]), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, len(aug)):
        if aug[i][width]:
            return None
    if len(piv_cols) != width:
        return None
    sol = [ZERO] * width
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][width]
    return sol


@lru_cache(maxsize=8192)
def loop_g_minus(q: QCoefficients, k_vector: tuple, shift_vector: tuple) -> LaurentMatrix:
    """Negative Birkhoff factor of ``T^{-k} g^{(shift)}``; raises :class:`NoBirkhoff` where tau vanishes."""
    return birkhoff_factorize(loop_matrix(q, shift_vector, k_vector))[0]


def loop_h(q: QCoefficients, k_vector: tuple, shift_vector: tuple) -> dict:
    """``{(a, b): coefficient of E_ab z^-1 in g_minus}`` of ``T^{-k} g^{(shift)}``."""
    g_minus = loop_g_minus(q, tuple(k_vector), tuple(shift_vector))
    n = q.n
    return {(a, b): g_minus.coeffs(a, b).get(-1, ZERO) for a in range(n) for b in range(n)}


# ---------------------------------------------------------------------------
# parameter maps for the three-component Q-system


def gl_shift_from_q(params: Sequence[int], mapping: str = "derived") -> tuple[int, int, int]:
    """A shift ``(alpha, beta, gamma)`` whose loop tau carries Q-system parameters ``params``.

    Loop tau functions only see differences of the shift entries.
    ``"derived"`` reads ``(A, B) = (alpha - gamma, beta - gamma)``;
    ``"candidate"`` reads ``(A, B) = (alpha - beta, beta - gamma)``.
    """
    A, B = params
    if mapping == "derived":
        return (A, B, 0)
    if mapping == "candidate":
        return (A + B, B, 0)
    raise ValueError(f"unknown mapping {mapping!r}")


def q_tau(q: QCoefficients, k_vector: Sequence[int], params: Sequence[int], mapping: str = "derived") -> Scalar:
    """Q-system tau function with ``n - 1`` loop parameters."""
    k_vector = tuple(k_vector)
    if q.n == 2:
        (a,) = params
        return hankel_loop(q, k_vector[0], a)
    if q.n == 3:
        return loop_tau(q, k_vector, gl_shift_from_q(params, mapping))
    raise ValueError("Q-system parameters are defined for n = 2, 3")


def check_q_identities(q: QCoefficients, grid, mapping: str = "derived"):
    """Loop identities on a grid; see :mod:`taulab.relations` for the report type."""
    from . import relations

    if q.n == 2:
        return relations.check_2q_loop(q, grid)
    if q.n == 3:
        return relations.check_3q(q, grid, mapping=mapping)
    raise ValueError("loop identities are implemented for n = 2, 3")
