"""Residuals of the bilinear difference systems, the h-identities and the conjecture probes.

Bilinear systems are evaluated by multiplication and addition only, so a
vanishing tau is a legal input.  Identities that divide by a tau (every
h-based check) skip such points and log the reason instead.

Tau values come from any callable ``tau(k_vector, shift_vector)``;
:class:`taulab.tau.TauTable` is one.  Any negative translation index gives 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

from .algebra import ONE, ZERO, Scalar, num_den
from .conditions import CoefficientArray
from . import looprestrict as lr
from . import matgroup
from .tau import Grid, TauTable, tau_hankel

TauFn = Callable[[tuple, tuple], Scalar]


@dataclass
class Residual:
    point: dict
    eq: str
    value: Scalar

    def to_json_obj(self) -> dict:
        num, den = num_den(self.value)
        return {"point": self.point, "eq": self.eq, "num": num, "den": den}


@dataclass
class RelationReport:
    """Per-equation residuals of one system on one instance.

    ``conjecture`` reports never pass or fail; their verdict is ``"reported"``.
    """

    system: str
    seed: int | None = None
    grid: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    conjecture: bool = False

    def add(self, point: dict, eq: str, value) -> None:
        self.residuals.append(Residual(point, eq, value))

    def skip(self, point: dict, reason: str) -> None:
        self.skipped.append({"point": point, "reason": reason})

    @property
    def all_zero(self) -> bool:
        return all(r.value == 0 for r in self.residuals)

    @property
    def nonzero(self) -> list:
        return [r for r in self.residuals if r.value != 0]

    @property
    def verdict(self) -> str:
        if self.conjecture:
            return "reported"
        return "pass" if self.all_zero else "fail"

    def merge(self, other: "RelationReport") -> "RelationReport":
        if other.system != self.system:
            raise ValueError("cannot merge reports of different systems")
        return RelationReport(
            self.system,
            self.seed,
            {**self.grid, **other.grid},
            self.residuals + other.residuals,
            self.skipped + other.skipped,
            self.conjecture or other.conjecture,
        )

    def summary(self) -> str:
        line = f"{self.system}: {self.verdict} ({len(self.residuals)} residuals, {len(self.nonzero)} nonzero, {len(self.skipped)} skipped)"
        return line

    def to_json_obj(self) -> dict:
        return {
            "system": self.system,
            "seed": self.seed,
            "grid": self.grid,
            "residuals": [r.to_json_obj() for r in self.residuals],
            "verdict": self.verdict,
            "skipped": self.skipped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=1, sort_keys=True) + "\n"


def _grid_obj(grid: Grid) -> dict:
    return {"k_vectors": [list(k) for k in grid.k_vectors], "shift_vectors": [list(s) for s in grid.shift_vectors]}


def _point(k_vector, shift_vector) -> dict:
    return {"k": list(k_vector), "shift": list(shift_vector)}


def _safe(tau: TauFn) -> TauFn:
    def t(k_vector, shift_vector):
        if any(k < 0 for k in k_vector):
            return ZERO
        return tau(tuple(k_vector), tuple(shift_vector))

    return t


def perturbed(table: TauTable, k_vector, shift_vector, delta=ONE) -> TauTable:
    """Copy of ``table`` with one value moved by ``delta`` (sensitivity control)."""
    out = table.copy()
    out.set_value(tuple(k_vector), tuple(shift_vector), table.value(k_vector, shift_vector) + delta)
    return out


# ---------------------------------------------------------------------------
# bilinear systems


def two_t_terms(tau: TauFn, k: int, a: int, b: int) -> tuple[Scalar, Scalar, Scalar]:
    """The three products of the two-component system, ``P1 = P2 - P3``."""
    t = _safe(tau)
    p1 = t((k + 1,), (a, b + 1)) * t((k - 1,), (a + 1, b))
    p2 = t((k,), (a + 1, b)) * t((k,), (a, b + 1))
    p3 = t((k,), (a, b)) * t((k,), (a + 1, b + 1))
    return p1, p2, p3


def check_2T(tau: TauFn, grid: Grid, seed: int | None = None) -> RelationReport:
    rep = RelationReport("2T", seed, _grid_obj(grid))
    for (k,), (a, b) in grid.points():
        p1, p2, p3 = two_t_terms(tau, k, a, b)
        rep.add(_point((k,), (a, b)), "2T", p1 - (p2 - p3))
    return rep


def two_q_terms(tau_q: Callable[[int, int], Scalar], k: int, a: int) -> tuple[Scalar, Scalar, Scalar]:
    """``P1 = P2 - P3`` for the loop system, in the same slots as :func:`two_t_terms`."""
    t = lambda kk, aa: ZERO if kk < 0 else tau_q(kk, aa)
    p1 = t(k + 1, a - 1) * t(k - 1, a + 1)
    p2 = t(k, a + 1) * t(k, a - 1)
    p3 = t(k, a) ** 2
    return p1, p2, p3


def check_2Q(tau_q: Callable[[int, int], Scalar], grid: Grid, seed: int | None = None) -> RelationReport:
    """``(tau_k^(a))^2 = tau_k^(a+1) tau_k^(a-1) - tau_{k+1}^(a-1) tau_{k-1}^(a+1)``.

    ``grid.shift_vectors`` holds one-element tuples ``(a,)``.
    """
    rep = RelationReport("2Q", seed, _grid_obj(grid))
    for (k,), (a,) in grid.points():
        p1, p2, p3 = two_q_terms(tau_q, k, a)
        rep.add(_point((k,), (a,)), "2Q", p3 - (p2 - p1))
    return rep


def lifted_array(q: lr.QCoefficients, k_max: int, shift_max: int) -> CoefficientArray:
    """A finite lift big enough for every Hankel entry used on the grid."""
    B = k_max + shift_max + 3
    return lr.lift(q, B)


def check_2T_collapse(q: lr.QCoefficients, k_max: int, shift_max: int, seed: int | None = None) -> RelationReport:
    """On lifted data each product of the two-component system equals its loop counterpart.

    With ``a = alpha - beta`` the three 2T products match the three 2Q
    products slot by slot; the 2T residual itself is reported as well.
    """
    arr = lifted_array(q, k_max, shift_max)
    tau2 = lambda kv, sv: tau_hankel(arr, kv[0], *sv)
    tq = lambda k, a: lr.hankel_loop(q, k, a)
    grid = Grid.n2(k_max, shift_max)
    rep = RelationReport("2T->2Q", seed, _grid_obj(grid))
    for (k,), (a, b) in grid.points():
        t_terms = two_t_terms(tau2, k, a, b)
        q_terms = two_q_terms(tq, k, a - b)
        pt = _point((k,), (a, b))
        for idx, (x, y) in enumerate(zip(t_terms, q_terms), 1):
            rep.add(pt, f"P{idx}", x - y)
        rep.add(pt, "2T", t_terms[0] - t_terms[1] + t_terms[2])
    return rep


def _t3(tau: TauFn):
    t = _safe(tau)
    return lambda k, l, a, b, g: t((k, l), (a, b, g))


THREE_TERM = ("3term-alpha", "3term-beta", "3term-gamma")
FOUR_TERM = ("4term-alpha", "4term-beta", "4term-gamma")


def three_term_residuals(tau: TauFn, k: int, l: int, a: int, b: int, g: int) -> list[Scalar]:
    T = _t3(tau)
    r_alpha = (
        -T(k, l - 1, a, b, g) * T(k, l, a + 1, b, g)
        + T(k, l - 1, a + 1, b, g) * T(k, l, a, b, g)
        - T(k + 1, l, a, b, g) * T(k - 1, l - 1, a + 1, b, g)
    )
    r_beta = (
        T(k + 1, l - 1, a, b + 1, g) * T(k, l, a, b, g)
        + T(k, l - 1, a, b, g) * T(k + 1, l, a, b + 1, g)
        - T(k + 1, l, a, b, g) * T(k, l - 1, a, b + 1, g)
    )
    r_gamma = (
        T(k - 1, l - 1, a, b, g) * T(k, l + 1, a, b, g + 1)
        - T(k - 1, l, a, b, g + 1) * T(k, l, a, b, g)
        + T(k - 1, l, a, b, g) * T(k, l, a, b, g + 1)
    )
    return [r_alpha, r_beta, r_gamma]


def four_term_residuals(tau: TauFn, k: int, l: int, a: int, b: int, g: int) -> list[Scalar]:
    T = _t3(tau)
    lhs = T(k, l, a, b, g) * T(k, l, a + 1, b + 1, g + 1)
    r_alpha = lhs - (
        T(k, l, a + 1, b, g) * T(k, l, a, b + 1, g + 1)
        + T(k + 1, l + 1, a, b + 1, g + 1) * T(k - 1, l - 1, a + 1, b, g)
        - T(k + 1, l, a, b + 1, g + 1) * T(k - 1, l, a + 1, b, g)
    )
    r_beta = lhs - (
        T(k, l, a, b + 1, g) * T(k, l, a + 1, b, g + 1)
        - T(k, l + 1, a + 1, b, g + 1) * T(k, l - 1, a, b + 1, g)
        - T(k - 1, l, a + 1, b, g + 1) * T(k + 1, l, a, b + 1, g)
    )
    r_gamma = lhs - (
        T(k, l, a, b, g + 1) * T(k, l, a + 1, b + 1, g)
        + T(k - 1, l - 1, a + 1, b + 1, g) * T(k + 1, l + 1, a, b, g + 1)
        - T(k, l - 1, a + 1, b + 1, g) * T(k, l + 1, a, b, g + 1)
    )
    return [r_alpha, r_beta, r_gamma]


def check_3T_three_term(tau: TauFn, grid: Grid, seed: int | None = None) -> RelationReport:
    rep = RelationReport("3T-three-term", seed, _grid_obj(grid))
    for (k, l), sv in grid.points():
        for name, r in zip(THREE_TERM, three_term_residuals(tau, k, l, *sv)):
            rep.add(_point((k, l), sv), name, r)
    return rep


def check_3T_four_term(tau: TauFn, grid: Grid, seed: int | None = None) -> RelationReport:
    rep = RelationReport("3T-four-term", seed, _grid_obj(grid))
    for (k, l), sv in grid.points():
        for name, r in zip(FOUR_TERM, four_term_residuals(tau, k, l, *sv)):
            rep.add(_point((k, l), sv), name, r)
    return rep


# ---------------------------------------------------------------------------
# loop systems


def three_q_residuals(T: Callable, k: int, l: int, A: int, B: int) -> list[Scalar]:
    """The four equations of the three-component loop system; ``T(k, l, A, B)``."""
    r1 = T(k - 1, l - 1, A + 1, B) * T(k + 1, l, A, B) + T(k, l - 1, A, B) * T(k, l, A + 1, B) - T(k, l, A, B) * T(k, l - 1, A + 1, B)
    r2 = T(k - 1, l, A, B) * T(k, l + 1, A, B + 1) + T(k - 1, l + 1, A, B) * T(k, l, A, B + 1) - T(k - 1, l, A, B + 1) * T(k, l + 1, A, B)
    r3 = T(k, l, A + 1, B) ** 2 - (
        T(k, l, A, B) * T(k, l, A + 2, B) + T(k + 1, l + 1, A, B) * T(k - 1, l - 1, A + 2, B) - T(k + 1, l, A, B) * T(k - 1, l, A + 2, B)
    )
    r4 = T(k, l, A, B + 1) ** 2 - (
        T(k, l, A, B) * T(k, l, A, B + 2) - T(k, l - 1, A, B + 2) * T(k, l + 1, A, B) - T(k + 1, l, A, B + 2) * T(k - 1, l, A, B)
    )
    return [r1, r2, r3, r4]


def check_3Q(q: lr.QCoefficients, grid: Grid, mapping: str = "derived", seed: int | None = None) -> RelationReport:
    """Four loop equations plus the three-term end identity, on ``grid`` of ``(k, l)`` and ``(A, B)``.

    ``mapping`` picks how the loop parameters sit inside the
    three-component shift (see :func:`taulab.looprestrict.gl_shift_from_q`).
    """
    T = lambda k, l, A, B: ZERO if k < 0 or l < 0 else lr.q_tau(q, (k, l), (A, B), mapping)
    rep = RelationReport(f"3Q[{mapping}]", seed, _grid_obj(grid))
    for (k, l), (A, B) in grid.points():
        pt = _point((k, l), (A, B))
        for idx, r in enumerate(three_q_residuals(T, k, l, A, B), 1):
            rep.add(pt, f"3Q-{idx}", r)
        end = T(k, l, A + 1, B) * T(k, l - 1, A, B) + T(k + 1, l, A, B) * T(k - 1, l - 1, A + 1, B) - T(k, l, A, B) * T(k, l - 1, A + 1, B)
        rep.add(pt, "end-3term", end)
    return rep


def check_3q(q: lr.QCoefficients, grid: Grid, mapping: str = "derived", seed: int | None = None) -> RelationReport:
    return check_3Q(q, grid, mapping, seed)


def _lmat(n: int, diag_power_at: int) -> lr.LaurentMatrix:
    coeffs = {(a, a): {1 if a == diag_power_at else 0: ONE} for a in range(n)}
    return lr.LaurentMatrix.from_coeffs(n, coeffs)


def check_2q_loop(q: lr.QCoefficients, grid: Grid, seed: int | None = None) -> RelationReport:
    """Two-component loop identities on ``(k,)`` x ``(a,)`` points.

    Residuals: nonnegativity of ``V`` and ``W`` (0 or 1), the two
    h-difference identities, ``h00 + h11`` and the loop system itself.
    The loop parameter ``a`` sits in the shift as ``(a, 0)``.
    """
    rep = RelationReport("2Q-loop", seed, _grid_obj(grid))
    tq = lambda k, a: ZERO if k < 0 else lr.hankel_loop(q, k, a)
    sv = lambda a: (a, 0)

    def gm(k, a):
        try:
            return lr.loop_g_minus(q, (k,), sv(a))
        except lr.NoBirkhoff:
            return None

    q0, q1 = _lmat(2, 0), _lmat(2, 1)
    for (k,), (a,) in grid.points():
        pt = _point((k,), (a,))
        p1, p2, p3 = two_q_terms(tq, k, a)
        rep.add(pt, "2Q", p3 - (p2 - p1))
        g0, g1 = gm(k, a), gm(k, a + 1)
        if g0 is None or g1 is None:
            rep.skip(pt, "vanishing tau: no Birkhoff factorization")
            continue
        v = g0.adjugate() @ q0 @ g1
        rep.add(pt, "V-nonneg", ZERO if v.is_nonnegative() else ONE)
        h0 = {ab: g0.coeffs(*ab).get(-1, ZERO) for ab in [(0, 0), (1, 1)]}
        h1 = g1.coeffs(1, 1).get(-1, ZERO)
        rep.add(pt, "h00+h11", h0[(0, 0)] + h0[(1, 1)])
        rep.add(pt, "h11-diff-a", -h0[(1, 1)] + h1 - tq(k + 1, a) * tq(k - 1, a + 1) / (tq(k, a) * tq(k, a + 1)))
        if k >= 1:
            g2 = gm(k - 1, a + 1)
            if g2 is None:
                rep.skip(pt, "vanishing tau at k-1: W and the k-difference skipped")
                continue
            w = g0.adjugate() @ q1 @ g2
            rep.add(pt, "W-nonneg", ZERO if w.is_nonnegative() else ONE)
            h2 = g2.coeffs(1, 1).get(-1, ZERO)
            rep.add(pt, "h11-diff-k", h0[(1, 1)] - h2 - tq(k - 1, a) * tq(k, a + 1) / (tq(k, a) * tq(k - 1, a + 1)))
    return rep


# ---------------------------------------------------------------------------
# h-identities on the infinite matrix group


def _h(arr, k_vector, shift_vector):
    try:
        return matgroup.h_table(arr, tuple(k_vector), tuple(shift_vector))
    except matgroup.SingularBlock:
        return None


def check_h_differences(arr: CoefficientArray, grid: Grid, seed: int | None = None) -> RelationReport:
    """h-difference identities and leading-coefficient ratios, h's from Gauss factorizations."""
    if arr.n == 2:
        return _hdiff2(arr, grid, seed)
    if arr.n == 3:
        return _hdiff3(arr, grid, seed)
    raise ValueError("h-identities are stated for n = 2, 3")


def _hdiff2(arr, grid, seed):
    rep = RelationReport("hdiff-2", seed, _grid_obj(grid))
    tau = _safe(lambda kv, sv: matgroup.tau_minor(arr, kv, sv))
    T = lambda k, a, b: tau((k,), (a, b))
    for (k,), (a, b) in grid.points():
        pt = _point((k,), (a, b))
        h = _h(arr, (k,), (a, b))
        if h is None or not T(k, a, b):
            rep.skip(pt, "tau vanishes")
            continue
        t = T(k, a, b)
        rep.add(pt, "h10", h.h(1, 0) - T(k + 1, a, b) / t)
        rep.add(pt, "h01", h.h(0, 1) - T(k - 1, a, b) / t)
        ha = _h(arr, (k,), (a + 1, b))
        if ha is None:
            rep.skip(pt, "tau at alpha+1 vanishes: first difference skipped")
        else:
            rep.add(pt, "h11-diff-alpha", ha.h(1, 1) - h.h(1, 1) - T(k + 1, a, b) * T(k - 1, a + 1, b) / (t * T(k, a + 1, b)))
        hb = _h(arr, (k + 1,), (a, b + 1))
        if hb is None:
            rep.skip(pt, "tau at (k+1, beta+1) vanishes: second difference skipped")
        else:
            rep.add(pt, "h11-diff-beta", hb.h(1, 1) - h.h(1, 1) - T(k + 1, a, b) * T(k, a, b + 1) / (t * T(k + 1, a, b + 1)))
    return rep


def _hdiff3(arr, grid, seed):
    rep = RelationReport("hdiff-3", seed, _grid_obj(grid))
    tau = _safe(lambda kv, sv: matgroup.tau_minor(arr, kv, sv))
    T = lambda k, l, a, b, g: tau((k, l), (a, b, g))
    for (k, l), (a, b, g) in grid.points():
        pt = _point((k, l), (a, b, g))
        h = _h(arr, (k, l), (a, b, g))
        t = T(k, l, a, b, g)
        if h is None or not t:
            rep.skip(pt, "tau vanishes")
            continue
        sgn = -1 if k % 2 else 1
        patterns = {
            "h01": T(k - 1, l, a, b, g) / t,
            "h10": T(k + 1, l, a, b, g) / t,
            "h12": sgn * T(k, l - 1, a, b, g) / t,
            "h21": sgn * T(k, l + 1, a, b, g) / t,
            "h02": sgn * T(k - 1, l - 1, a, b, g) / t,
            "h20": -sgn * T(k + 1, l + 1, a, b, g) / t,
        }
        for name, expect in patterns.items():
            rep.add(pt, name, h.h(int(name[1]), int(name[2])) - expect)
        hb = _h(arr, (k, l), (a, b + 1, g))
        if hb is not None:
            rep.add(pt, "h00-diff-beta", hb.h(0, 0) - h.h(0, 0) - T(k - 1, l, a, b, g) * T(k + 1, l, a, b + 1, g) / (t * T(k, l, a, b + 1, g)))
        else:
            rep.skip(pt, "tau at beta+1 vanishes: beta difference skipped")
        ha = _h(arr, (k, l), (a + 1, b, g))
        hk = _h(arr, (k + 1, l), (a, b, g))
        if ha is not None and hk is not None:
            rep.add(pt, "h00-diff-alpha-k", ha.h(0, 0) - hk.h(0, 0) - t * T(k + 1, l, a + 1, b, g) / (T(k + 1, l, a, b, g) * T(k, l, a + 1, b, g)))
        else:
            rep.skip(pt, "tau at alpha+1 or k+1 vanishes: alpha-k difference skipped")
        hg = _h(arr, (k, l), (a, b, g + 1))
        if hg is not None:
            rep.add(pt, "h00-diff-gamma", hg_diff_gamma(h, hg) - gamma_difference_ratio(T, k, l, a, b, g))
        else:
            rep.skip(pt, "tau at gamma+1 vanishes: gamma difference skipped")
    return rep


def hg_diff_gamma(h, hg) -> Scalar:
    return h.h(0, 0) - hg.h(0, 0)


def gamma_difference_ratio(T, k, l, a, b, g, denominator_shift=(0, 0, 1)) -> Scalar | None:
    """``tau_{k-1,l-1} tau_{k+1,l+1}^(gamma+1) / (tau tau^(shift + denominator_shift))``.

    The identity holds with the denominator at ``(alpha, beta, gamma+1)``;
    other ``denominator_shift`` values are accepted so that alternative
    forms can be compared.  Returns None if the denominator vanishes.
    """
    da, db, dg = denominator_shift
    den = T(k, l, a, b, g) * T(k, l, a + da, b + db, g + dg)
    if not den:
        return None
    return T(k - 1, l - 1, a, b, g) * T(k + 1, l + 1, a, b, g + 1) / den


# ---------------------------------------------------------------------------
# nonnegativity


def check_nonneg(arr: CoefficientArray, grid: Grid, seed: int | None = None) -> RelationReport:
    """All three nonnegativity variants; residual 0 means nonnegative, 1 means not.

    Points where either factorization is missing are skipped.
    """
    n = arr.n
    rep = RelationReport("nonneg", seed, _grid_obj(grid))
    for kv, sv in grid.points():
        pt = _point(kv, sv)
        for variant in (1, 2, 3):
            for i in (range(n) if variant == 1 else range(1, n)):
                k2, s2, _ = matgroup.nonnegative_pattern(n, variant, i, kv, sv)
                if any(x < 0 for x in k2):
                    continue
                try:
                    ok = matgroup.check_nonnegative(arr, variant, i, kv, sv)
                except matgroup.SingularBlock:
                    rep.skip({**pt, "variant": variant, "i": i}, "tau vanishes")
                    continue
                rep.add(pt, f"variant{variant}-i{i}", ZERO if ok else ONE)
    return rep


# ---------------------------------------------------------------------------
# conjecture probes


def _unit(n, i, v=1):
    e = [0] * n
    e[i] = v
    return e


def glinf_residual(tau: TauFn, hfn: Callable, n: int, i: int, k_vector, shift_vector) -> Scalar | None:
    """``1 - tau tau^(+1)/(tau^(+e_i) tau^(+1-e_i)) - sum_j h_ji^(+1-e_i) h_ij^(+e_i)``; None if undefined."""
    beta = list(shift_vector)
    plus = tuple(b + e for b, e in zip(beta, _unit(n, i)))
    rest = tuple(b + 1 - e for b, e in zip(beta, _unit(n, i)))
    allp = tuple(b + 1 for b in beta)
    tp, tr = tau(k_vector, plus), tau(k_vector, rest)
    if not tp or not tr:
        return None
    hp, hr = hfn(k_vector, plus), hfn(k_vector, rest)
    if hp is None or hr is None:
        return None
    s = sum((hr[(j, i)] * hp[(i, j)] for j in range(n) if j != i), ZERO)
    return 1 - tau(k_vector, tuple(beta)) * tau(k_vector, allp) / (tp * tr) - s


def _matgroup_h(arr):
    def h(kv, sv):
        t = _h(arr, kv, sv)
        if t is None:
            return None
        return {(a, b): t.h(a, b) for a in range(arr.n) for b in range(arr.n)}

    return h


def probe_conjecture_glinf(arr: CoefficientArray, n: int, i: int, k_vector, shift_vector, seed: int | None = None) -> RelationReport:
    rep = RelationReport("conj-glinf", seed, {"n": n, "i": i}, conjecture=True)
    if n != arr.n:
        raise ValueError("n does not match the array")
    tau = _safe(lambda kv, sv: matgroup.tau_minor(arr, kv, sv))
    r = glinf_residual(tau, _matgroup_h(arr), n, i, tuple(k_vector), tuple(shift_vector))
    pt = _point(k_vector, shift_vector)
    if r is None:
        rep.skip(pt, "tau vanishes")
    else:
        rep.add(pt, f"i={i}", r)
    return rep


def probe_glinf_grid(arr: CoefficientArray, grid: Grid, seed: int | None = None) -> RelationReport:
    rep = RelationReport("conj-glinf", seed, _grid_obj(grid), conjecture=True)
    for kv, sv in grid.points():
        for i in range(arr.n):
            rep = rep.merge(probe_conjecture_glinf(arr, arr.n, i, kv, sv, seed))
    rep.grid = _grid_obj(grid)
    return rep


def gln_shift(beta: Sequence[int]) -> tuple:
    """Loop parameters ``(b_1..b_{n-1})`` placed in the full shift as ``(0, b_1, .., b_{n-1})``."""
    return (0, *beta)


def gln_residual(q: lr.QCoefficients, i: int, k_vector, beta) -> Scalar | None:
    n = q.n
    k_vector = tuple(k_vector)
    bm, bp = list(beta), list(beta)
    bm[i - 1] -= 1
    bp[i - 1] += 1
    t = _safe(lambda kv, sv: lr.loop_tau(q, kv, sv))
    tm, tp = t(k_vector, gln_shift(bm)), t(k_vector, gln_shift(bp))
    if not tm or not tp or any(k < 0 for k in k_vector):
        return None
    hm = lr.loop_h(q, k_vector, gln_shift(bm))
    hp = lr.loop_h(q, k_vector, gln_shift(bp))
    t0 = t(k_vector, gln_shift(beta))
    return 1 - t0 * t0 / (tm * tp) - sum((hm[(j, i)] * hp[(i, j)] for j in range(n) if j != i), ZERO)


def probe_conjecture_gln(q: lr.QCoefficients, n: int, i: int, grid: Grid, seed: int | None = None) -> RelationReport:
    """Loop-group conjecture for one ``i`` in ``1..n-1``; ``grid.shift_vectors`` are ``(b_1..b_{n-1})``."""
    if n != q.n:
        raise ValueError("n does not match the loop data")
    if not 1 <= i <= n - 1:
        raise ValueError("i must lie in 1..n-1")
    rep = RelationReport("conj-gln", seed, {**_grid_obj(grid), "i": i}, conjecture=True)
    for kv, beta in grid.points():
        r = gln_residual(q, i, kv, beta)
        pt = _point(kv, beta)
        if r is None:
            rep.skip(pt, "tau vanishes")
        else:
            rep.add(pt, f"i={i}", r)
    return rep


def probe_gln_grid(q: lr.QCoefficients, grid: Grid, seed: int | None = None) -> RelationReport:
    rep = RelationReport("conj-gln", seed, _grid_obj(grid), conjecture=True)
    for i in range(1, q.n):
        rep = rep.merge(probe_conjecture_gln(q, q.n, i, grid, seed))
    rep.grid = _grid_obj(grid)
    return rep
