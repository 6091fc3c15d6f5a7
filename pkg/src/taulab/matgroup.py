"""Window-truncated matrices: group elements, Gauss factorization, minors.

Labels are pairs ``(a, k)`` standing for ``e_a z^k``; ``H+`` is ``k >= 0``
and ``H-`` is ``k < 0``.  A group element built from a
:class:`~taulab.conditions.CoefficientArray` differs from the identity in
finitely many columns, so every determinant or Gauss block that matters
reduces to a small core matrix.  The reductions used here are exact, and
window doubling in the tests checks that they are.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .algebra import ONE, ZERO, Scalar, det, solve_right
from .conditions import CoefficientArray, conjugate


class SingularBlock(ArithmeticError):
    """The (+,+) block is singular: the tau function vanishes there."""


class WindowTooSmall(ValueError):
    pass


def power_shifts(n: int, k_vector: Sequence[int]) -> tuple[int, ...]:
    """Power shift per component applied by ``T^{-k}``.

    ``T_i^{-1}`` raises component ``i`` by one power and lowers component
    ``i-1`` by one, so component ``a`` moves by ``k_a - k_{a+1}``.
    """
    k = [0, *k_vector, 0]
    return tuple(k[a] - k[a + 1] for a in range(n))


# ---------------------------------------------------------------------------
# truncated matrices


@dataclass
class TruncatedMatrix:
    """Sparse columns of ``T^{-k} g`` restricted to a window.

    ``columns[c]`` maps row labels to values for column label ``c``;
    ``col_labels`` is the full column window and ``row_labels`` its image
    under the translation.
    """

    n: int
    K: int
    col_labels: tuple
    row_labels: tuple
    columns: dict

    def get(self, row, col) -> Scalar:
        return self.columns.get(col, {}).get(row, ZERO)

    def dense(self, rows: Sequence | None = None, cols: Sequence | None = None) -> list[list[Scalar]]:
        rows = self.row_labels if rows is None else rows
        cols = self.col_labels if cols is None else cols
        return [[self.get(r, c) for c in cols] for r in rows]

    def nonidentity_entries(self) -> dict:
        """Entries that are not part of the unit diagonal of a plain identity."""
        out = {}
        for c, col in self.columns.items():
            for r, v in col.items():
                if r != c or v != 1:
                    out[(r, c)] = v
        return out


def window_labels(n: int, K: int) -> list[tuple[int, int]]:
    return sorted(((a, k) for a in range(n) for k in range(-K, K)), key=lambda l: (l[1], l[0]))


def _off_diagonal(arr: CoefficientArray) -> dict:
    """``{source label: {target label: value}}`` for ``g - I``."""
    cols: dict = {}
    for (a, b), i, j, v in arr.entries():
        cols.setdefault((b, j), {})[(a, -i - 1)] = v
    return cols


def build_group_element(arr: CoefficientArray, shift_vector: Sequence[int] | None, k_vector: Sequence[int] | None, K: int) -> TruncatedMatrix:
    n = arr.n
    shift_vector = tuple(shift_vector or (0,) * n)
    k_vector = tuple(k_vector or (0,) * (n - 1))
    sh = conjugate(arr, shift_vector)
    s = power_shifts(n, k_vector)
    move = lambda l: (l[0], l[1] + s[l[0]])
    cols_lab = window_labels(n, K)
    inside = set(cols_lab)
    off = _off_diagonal(sh)
    for src, tg in off.items():
        if src not in inside or any(t not in inside for t in tg):
            raise WindowTooSmall(f"support reaches outside the window K={K}")
    columns = {}
    for c in cols_lab:
        col = {move(c): ONE}
        for t, v in off.get(c, {}).items():
            col[move(t)] = v
        columns[c] = col
    rows_lab = sorted((move(c) for c in cols_lab), key=lambda l: (l[1], l[0]))
    return TruncatedMatrix(n, K, tuple(cols_lab), tuple(rows_lab), columns)


# ---------------------------------------------------------------------------
# Gauss factorization


@dataclass
class GaussPair:
    """``M = g_minus g_zeroplus`` for a truncated matrix ``M``.

    ``x`` holds the (-,+) block of ``g_minus`` as ``{(row, col): value}``.
    """

    matrix: TruncatedMatrix
    x: dict

    @property
    def g_minus(self) -> dict:
        """Sparse entries of ``g_minus - I``."""
        return dict(self.x)

    def g_zeroplus_column(self, col) -> dict:
        """Column of ``(I - X) M``; ``X`` squares to zero so this is ``g_minus^-1 M``."""
        src = self.matrix.columns[col]
        out = dict(src)
        for r, v in src.items():
            if r[1] >= 0:
                for (rr, cc), xv in self._x_by_col().get(r, ()):
                    out[rr] = out.get(rr, ZERO) - xv * v
        return {r: v for r, v in out.items() if v}

    def _x_by_col(self) -> dict:
        if not hasattr(self, "_xcol"):
            idx: dict = {}
            for (r, c), v in self.x.items():
                idx.setdefault(c, []).append(((r, c), v))
            self._xcol = idx
        return self._xcol

    def reconstruct_column(self, col) -> dict:
        """Column of ``g_minus g_zeroplus``; equals the input column."""
        mid = self.g_zeroplus_column(col)
        out = dict(mid)
        for r, v in mid.items():
            if r[1] >= 0:
                for (rr, _), xv in self._x_by_col().get(r, ()):
                    out[rr] = out.get(rr, ZERO) + xv * v
        return {r: v for r, v in out.items() if v}


def gauss_factorize(m: TruncatedMatrix) -> GaussPair:
    """Solve ``X A++ = A-+`` on the core of the (+,+) block.

    A column ``c`` that ``M`` sends to a single unit vector inside ``H+``
    forces the matching column of ``X`` to vanish, so it and its image row
    are dropped before solving.
    """
    plus_cols = [c for c in m.col_labels if c[1] >= 0]
    plus_rows = [r for r in m.row_labels if r[1] >= 0]
    if len(plus_cols) != len(plus_rows):
        raise WindowTooSmall("(+,+) block is not square")
    dropped_rows = set()
    core_cols = []
    for c in plus_cols:
        col = m.columns[c]
        if len(col) == 1:
            (r, v), = col.items()
            if r[1] >= 0 and v == 1:
                dropped_rows.add(r)
                continue
        core_cols.append(c)
    core_rows = [r for r in plus_rows if r not in dropped_rows]
    if len(core_rows) != len(core_cols):
        raise SingularBlock("(+,+) block has a zero column")
    ridx = {r: i for i, r in enumerate(core_rows)}
    a_pp = [[ZERO] * len(core_cols) for _ in core_rows]
    rhs: dict = {}
    for jc, c in enumerate(core_cols):
        for r, v in m.columns[c].items():
            if r[1] >= 0:
                i = ridx.get(r)
                if i is not None:
                    a_pp[i][jc] = v
            else:
                rhs.setdefault(r, [ZERO] * len(core_cols))[jc] = v
    minus_rows = sorted(rhs, key=lambda l: (l[1], l[0]))
    sol = solve_right(a_pp, [rhs[r] for r in minus_rows]) if core_rows else []
    if sol is None:
        raise SingularBlock("(+,+) block is singular")
    x = {}
    for r, row in zip(minus_rows, sol):
        for c, v in zip(core_rows, row):
            if v:
                x[(r, c)] = v
    return GaussPair(m, x)


@dataclass
class HTable:
    """Coefficients of ``E_ab^{-i-1, j}`` in ``g_minus``."""

    values: dict = field(default_factory=dict)

    def get(self, a: int, b: int, i: int = 0, j: int = 0) -> Scalar:
        return self.values.get((a, b, i, j), ZERO)

    def h(self, a: int, b: int) -> Scalar:
        return self.get(a, b, 0, 0)

    def __len__(self):
        return len(self.values)


def extract_h(gp: GaussPair) -> HTable:
    vals = {}
    for ((a, p), (b, j)), v in gp.x.items():
        vals[(a, b, -p - 1, j)] = v
    return HTable(vals)


def auto_K(arr: CoefficientArray, k_vector: Sequence[int], shift_vector: Sequence[int]) -> int:
    return arr.max_index() + 1 + max((abs(s) for s in shift_vector), default=0) + sum(abs(k) for k in k_vector) + 2


@lru_cache(maxsize=4096)
def _gauss_cached(arr: CoefficientArray, k_vector: tuple, shift_vector: tuple, K: int) -> GaussPair:
    return gauss_factorize(build_group_element(arr, shift_vector, k_vector, K))


def gauss_for(arr: CoefficientArray, k_vector: Sequence[int], shift_vector: Sequence[int], K: int | None = None) -> GaussPair:
    k_vector, shift_vector = tuple(k_vector), tuple(shift_vector)
    if K is None:
        K = auto_K(arr, k_vector, shift_vector)
    return _gauss_cached(arr, k_vector, shift_vector, K)


def h_table(arr: CoefficientArray, k_vector: Sequence[int], shift_vector: Sequence[int], K: int | None = None) -> HTable:
    return extract_h(gauss_for(arr, k_vector, shift_vector, K))


# ---------------------------------------------------------------------------
# generalized minors


def _normal_order_q(word: list[tuple[int, int]]) -> tuple[int, list[tuple[int, int]]]:
    """Sort a word of ``Q_a^x`` factors by component, merging equal components.

    Factors of different components anticommute, so swapping ``Q_a^x`` and
    ``Q_b^y`` costs ``(-1)^(x y)``.
    """
    word = list(word)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(word) - 1):
            (a, x), (b, y) = word[i], word[i + 1]
            if a > b:
                word[i], word[i + 1] = word[i + 1], word[i]
                if (x * y) & 1:
                    sign = -sign
                changed = True
    merged: list[tuple[int, int]] = []
    for a, x in word:
        if merged and merged[-1][0] == a:
            merged[-1] = (a, merged[-1][1] + x)
        else:
            merged.append((a, x))
    return sign, [(a, x) for a, x in merged if x]


def _word_sign_on_vacuum(ops: list[tuple[str, int]], occupied: list[int]) -> tuple[int, list[int]]:
    """Apply creators/annihilators (rightmost first) to a sorted finite label list.

    ``occupied`` is the part of the vacuum that the word can touch, written
    as sorted integers; everything larger is occupied and irrelevant to the
    signs because it sits to the right.
    """
    occ = list(occupied)
    sign = 1
    for kind, m in reversed(ops):
        pos = bisect_left(occ, m)
        present = pos < len(occ) and occ[pos] == m
        if kind == "c":
            if present:
                return 0, occ
            occ.insert(pos, m)
        else:
            if not present:
                return 0, occ
            occ.pop(pos)
        if pos & 1:
            sign = -sign
    return sign, occ


def translation_sign(n: int, k_vector: Sequence[int]) -> int:
    """Sign of ``T_1^k1 ... T_{n-1}^k_{n-1} v0`` against its canonical wedge.

    Each ``T_i^m`` is ``(-1)^(m(m-1)/2) Q_i^m Q_{i-1}^-m``; the resulting
    word is normal ordered, and each ``Q_a^p v0`` is replaced by its ordered
    product of creators (``p > 0``) or annihilators (``p < 0``).
    """
    sign = 1
    word: list[tuple[int, int]] = []
    for i, m in enumerate(k_vector, start=1):
        if (m * (m - 1) // 2) & 1:
            sign = -sign
        word += [(i, m), (i - 1, -m)]
    s2, ordered = _normal_order_q(word)
    sign *= s2
    for x in range(len(ordered)):
        for y in range(x + 1, len(ordered)):
            if (ordered[x][1] * ordered[y][1]) & 1:
                sign = -sign
    # Q_0^p0 ... Q_{n-1}^p_{n-1} v0 = sign * M_{n-1} ... M_0 v0
    ops: list[tuple[str, int]] = []
    for a, p in reversed(ordered):
        if p > 0:
            ops += [("c", n * (-q) + a) for q in range(p, 0, -1)]
        else:
            ops += [("a", n * q + a) for q in range(-p - 1, -1, -1)]
    depth = max((abs(p) for _, p in ordered), default=0) + 1
    vac = list(range(0, n * depth))
    s3, occ = _word_sign_on_vacuum(ops, vac)
    if s3 == 0:
        raise AssertionError("translation word annihilated the vacuum")
    return sign * s3


def translation_label_thresholds(n: int, k_vector: Sequence[int]) -> tuple[int, ...]:
    """Component ``a`` of ``T^k v0`` occupies exactly the powers ``>=`` entry ``a``."""
    return tuple(-s for s in power_shifts(n, k_vector))


def tau_minor(arr: CoefficientArray, k_vector: Sequence[int], shift_vector: Sequence[int] | None = None, K: int | None = None) -> Scalar:
    """``<T^k v0, g v0>`` as a signed minor of ``g`` with rows ``T^k v0`` and columns ``v0``."""
    n = arr.n
    k_vector = tuple(k_vector)
    shift_vector = tuple(shift_vector or (0,) * n)
    if len(k_vector) != n - 1:
        raise ValueError(f"k_vector needs {n - 1} entries")
    if K is None:
        K = auto_K(arr, k_vector, shift_vector)
    sh = conjugate(arr, shift_vector)
    off = _off_diagonal(sh)
    thr = translation_label_thresholds(n, k_vector)
    labels = window_labels(n, K)
    for src, tg in off.items():
        if not (-K <= src[1] < K) or any(not (-K <= t[1] < K) for t in tg):
            raise WindowTooSmall(f"support reaches outside the window K={K}")
    if any(not (-K < t <= K - 1) for t in thr):
        raise WindowTooSmall("translation does not fit in the window")
    rows = [l for l in labels if l[1] >= thr[l[0]]]
    cols = [l for l in labels if l[1] >= 0]
    active = set(off)
    for tg in off.values():
        active.update(tg)
    rset, cset = set(rows), set(cols)
    sign = 1
    rpos = {l: i for i, l in enumerate(rows)}
    cpos = {l: i for i, l in enumerate(cols)}
    keep_r, keep_c = [], []
    for l in rows:
        if l in active:
            keep_r.append(l)
        elif l in cset:
            if (rpos[l] + cpos[l]) & 1:
                sign = -sign
        else:
            return ZERO
    for l in cols:
        if l in active:
            keep_c.append(l)
        elif l not in rset:
            return ZERO
    if len(keep_r) != len(keep_c):
        raise AssertionError("core minor is not square")
    core = [[(ONE if r == c else ZERO) + off.get(c, {}).get(r, ZERO) for c in keep_c] for r in keep_r]
    return sign * translation_sign(n, k_vector) * det(core)


# ---------------------------------------------------------------------------
# nonnegativity


def _mul_sparse(a: dict, b: dict) -> dict:
    """Product of sparse matrices stored as ``{(row, col): value}``."""
    by_row: dict = {}
    for (r, c), v in b.items():
        by_row.setdefault(r, []).append((c, v))
    out: dict = {}
    for (r, c), v in a.items():
        for cc, w in by_row.get(c, ()):
            out[(r, cc)] = out.get((r, cc), ZERO) + v * w
    return {k: v for k, v in out.items() if v}


def nonnegative_product(x1: dict, x2: dict, comp: int, labels: Iterable) -> dict:
    """Entries of ``(I - X1) Qbar^-1 (I + X2)`` in the (-,+) block.

    ``Qbar_comp^-1`` sends ``e_comp z^m`` to ``e_comp z^(m+1)``; as its
    (-,+) block is empty it only enters through the two correction terms.
    """
    shift = lambda l: (l[0], l[1] + 1) if l[0] == comp else l
    labels = set(labels)
    labels |= {(l[0], l[1] - 1) for l in labels if l[0] == comp}
    q = {(shift(l), l): ONE for l in labels}
    neg_x1 = {k: -v for k, v in x1.items()}
    terms = [_mul_sparse(q, x2), _mul_sparse(neg_x1, q), _mul_sparse(_mul_sparse(neg_x1, q), x2)]
    out: dict = {}
    for part in terms:
        for (r, c), v in part.items():
            if r[1] < 0 <= c[1]:
                out[(r, c)] = out.get((r, c), ZERO) + v
    for (r, c), v in q.items():
        if r[1] < 0 <= c[1]:
            out[(r, c)] = out.get((r, c), ZERO) + v
    return {k: v for k, v in out.items() if v}


def nonnegative_pattern(n: int, variant: int, i: int, k_vector: Sequence[int], shift_vector: Sequence[int]):
    """``(k', shift', translated component)`` for the second factor of a variant.

    1. same ``k``, shift raised at ``i``, ``Q_i^-1``;
    2. ``k_i`` raised, shift raised at ``i``, ``Q_{i-1}^-1``;
    3. ``k_i`` lowered, shift raised at ``i-1``, ``Q_i^-1``.
    """
    k2, s2 = list(k_vector), list(shift_vector)
    if variant == 1:
        if not 0 <= i <= n - 1:
            raise ValueError("variant 1 needs 0 <= i <= n-1")
        s2[i] += 1
        comp = i
    elif variant in (2, 3):
        if not 1 <= i <= n - 1:
            raise ValueError(f"variant {variant} needs 1 <= i <= n-1")
        if variant == 2:
            k2[i - 1] += 1
            s2[i] += 1
            comp = i - 1
        else:
            k2[i - 1] -= 1
            s2[i - 1] += 1
            comp = i
    else:
        raise ValueError("variant must be 1, 2 or 3")
    return tuple(k2), tuple(s2), comp


def check_nonnegative(arr: CoefficientArray, variant: int, i: int, k_vector: Sequence[int], shift_vector: Sequence[int], K: int | None = None) -> bool:
    """True iff ``g_-^{-1} Q^-1 g_-'`` has no ``E_ab^{-i-1,j}`` terms with ``i, j >= 0``."""
    n = arr.n
    k_vector, shift_vector = tuple(k_vector), tuple(shift_vector)
    k2, s2, comp = nonnegative_pattern(n, variant, i, k_vector, shift_vector)
    if K is None:
        K = max(auto_K(arr, k_vector, shift_vector), auto_K(arr, k2, s2))
    g1 = gauss_for(arr, k_vector, shift_vector, K)
    g2 = gauss_for(arr, k2, s2, K)
    labels = set()
    for gp in (g1, g2):
        for r, c in gp.x:
            labels.update((r, c))
    labels |= {(comp, -1)}
    return not nonnegative_product(g1.x, g2.x, comp, labels)
