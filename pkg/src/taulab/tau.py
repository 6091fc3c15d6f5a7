"""Tau functions by formula, and tables that referee several methods against each other.

Three independent routes are available: closed determinant/residue
formulas (this module), generalized minors (:mod:`taulab.matgroup`) and the
wedge engine (:mod:`taulab.fock`).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

from .algebra import ONE, ZERO, Scalar, det, factorial, num_den
from .conditions import CoefficientArray, conjugate
from . import fock, matgroup


class CrossMethodMismatch(AssertionError):
    def __init__(self, key, stored: dict, method: str, value):
        self.key = key
        self.stored = stored
        self.method = method
        self.value = value
        super().__init__(f"methods disagree at {key}: {stored} vs {method}={value}")


def tau_hankel(arr: CoefficientArray, k: int, alpha: int = 0, beta: int = 0) -> Scalar:
    """``det[c_{-beta+j, alpha+i}]_{i,j<k}`` on the raw (uncut) array."""
    if arr.n != 2:
        raise ValueError("the Hankel formula is for two components")
    if k < 0:
        return ZERO
    block = arr.blocks[(1, 0)]
    return det([[block.get((-beta + j, alpha + i), ZERO) for j in range(k)] for i in range(k)])


# ---------------------------------------------------------------------------
# the three-component residue formula


def _vdm_pairs(names: Sequence[int]) -> list[tuple[int, int]]:
    return list(combinations(names, 2))


def _residue_term(blocks: dict, boxes: dict, nc: int, nd: int, ne: int, order: int | None) -> Scalar:
    """Sum over the monomials of ``p_{nc,nd,ne}`` of products of moments.

    Variables are laid out as ``z`` and ``w`` of every c-pair, then every
    d-pair, then every e-pair.  The polynomial factors are expanded first;
    each ``1/(z_c - w_e) = sum_m w_e^m z_c^(-m-1)`` only lowers ``z_c`` and
    raises ``w_e``, so monomials that can no longer land in the support box
    are discarded on the way.  With ``order=None`` the geometric series is
    cut only by that pruning; a finite ``order`` caps ``m`` as well.
    """
    groups = [("c", nc), ("d", nd), ("e", ne)]
    zi: dict = {}
    wi: dict = {}
    owner = []
    pos = 0
    for g, cnt in groups:
        for t in range(cnt):
            zi[(g, t)] = pos
            wi[(g, t)] = pos + 1
            owner += [(g, "z"), (g, "w")]
            pos += 2
    nvar = pos
    if any(boxes[g] is None for g, cnt in groups if cnt):
        return ZERO
    lo = [boxes[g][0] if v == "z" else boxes[g][2] for g, v in owner]
    hi = [boxes[g][1] if v == "z" else boxes[g][3] for g, v in owner]

    poly = {(0,) * nvar: ONE}

    def mul_binomial(p: dict, i: int, j: int) -> dict:
        """Multiply by (x_i - x_j)."""
        out: dict = {}
        for e, c in p.items():
            a = list(e)
            a[i] += 1
            ka = tuple(a)
            out[ka] = out.get(ka, ZERO) + c
            b = list(e)
            b[j] += 1
            kb = tuple(b)
            out[kb] = out.get(kb, ZERO) - c
        return {k: v for k, v in out.items() if v}

    for g, cnt in groups:
        for s, t in _vdm_pairs(range(cnt)):
            poly = mul_binomial(poly, wi[(g, s)], wi[(g, t)])
            poly = mul_binomial(poly, zi[(g, s)], zi[(g, t)])
    for s in range(nc):
        for t in range(nd):
            poly = mul_binomial(poly, wi[("c", s)], wi[("d", t)])
    for s in range(nd):
        for t in range(ne):
            poly = mul_binomial(poly, zi[("d", s)], zi[("e", t)])

    # every later factor only lowers c-pair z's and raises e-pair w's
    def alive(e) -> bool:
        for v in range(nvar):
            g, kind = owner[v]
            if e[v] > hi[v] and not (g == "c" and kind == "z"):
                return False
            if e[v] < lo[v] and not (g == "e" and kind == "w"):
                return False
        return True

    poly = {e: c for e, c in poly.items() if alive(e)}
    for s in range(nc):
        for t in range(ne):
            iz, iw = zi[("c", s)], wi[("e", t)]
            out: dict = {}
            for e, c in poly.items():
                m_max = min(e[iz] - 1 - lo[iz], hi[iw] - e[iw])
                if order is not None:
                    m_max = min(m_max, order)
                for m in range(0, m_max + 1):
                    a = list(e)
                    a[iz] -= m + 1
                    a[iw] += m
                    key = tuple(a)
                    out[key] = out.get(key, ZERO) + c
            poly = {k: v for k, v in out.items() if v}
    total = ZERO
    for e, c in poly.items():
        prod = c
        for t in range(nvar // 2):
            g = owner[2 * t][0]
            val = blocks[g].get((e[2 * t], e[2 * t + 1]), ZERO)
            if not val:
                prod = ZERO
                break
            prod *= val
        if prod:
            total += prod
    return total


def tau_residue_3(arr: CoefficientArray, k: int, l: int, alpha: int = 0, beta: int = 0, gamma: int = 0, order: int | None = None) -> Scalar:
    """Three-component tau function from the residue formula.

    Sums over ``nc + nd = k`` and ``nd + ne = l`` of
    ``(-1)^(nd(nd+1)/2) / (nc! nd! ne!)`` times the product condition of the
    shifted c, d, e moments applied to ``p_{nc,nd,ne}``.  A monomial
    ``z^a w^b`` in a c-pair evaluates to ``c_{a-beta, b+alpha}`` (raw array,
    no cutoff), and likewise ``d_{a-gamma, b+alpha}`` and ``e_{a-gamma, b+beta}``.
    """
    if arr.n != 3:
        raise ValueError("the residue formula is for three components")
    if k < 0 or l < 0:
        return ZERO
    sh = conjugate(arr, (alpha, beta, gamma))
    blocks = {"c": sh.blocks[(1, 0)], "d": sh.blocks[(2, 0)], "e": sh.blocks[(2, 1)]}
    boxes = {"c": sh.support_box((1, 0)), "d": sh.support_box((2, 0)), "e": sh.support_box((2, 1))}
    total = ZERO
    for nd in range(0, min(k, l) + 1):
        nc, ne = k - nd, l - nd
        term = _residue_term(blocks, boxes, nc, nd, ne, order)
        if term:
            sign = -1 if (nd * (nd + 1) // 2) & 1 else 1
            total += sign * term / (factorial(nc) * factorial(nd) * factorial(ne))
    return total


# ---------------------------------------------------------------------------
# tables


METHODS = ("hankel", "residue", "minor", "fock")


def _key(k_vector, shift_vector):
    return (tuple(k_vector), tuple(shift_vector))


@dataclass
class TauTable:
    """Tau values keyed by ``(k_vector, shift_vector)``.

    ``values[key]`` maps a method name to its value; inserting a value that
    differs from one already stored for the key raises
    :class:`CrossMethodMismatch`.  When ``source`` is set, missing keys are
    computed on demand by the minor route.
    """

    n: int
    values: dict = field(default_factory=dict)
    source: CoefficientArray | None = None

    def insert(self, k_vector, shift_vector, method: str, value) -> None:
        key = _key(k_vector, shift_vector)
        slot = self.values.setdefault(key, {})
        for other, v in slot.items():
            if v != value:
                raise CrossMethodMismatch(key, dict(slot), method, value)
        slot[method] = value

    def value(self, k_vector, shift_vector) -> Scalar:
        """The tau value; zero when any translation index is negative."""
        k_vector = tuple(k_vector)
        if any(k < 0 for k in k_vector):
            return ZERO
        key = _key(k_vector, shift_vector)
        slot = self.values.get(key)
        if not slot:
            if self.source is None:
                raise KeyError(key)
            self.insert(k_vector, shift_vector, "minor", matgroup.tau_minor(self.source, k_vector, shift_vector))
            slot = self.values[key]
        return next(iter(slot.values()))

    __call__ = value

    def set_value(self, k_vector, shift_vector, value, method="override") -> None:
        """Overwrite a value (used to build perturbed controls)."""
        self.values[_key(k_vector, shift_vector)] = {method: value}

    def copy(self) -> "TauTable":
        return TauTable(self.n, {k: dict(v) for k, v in self.values.items()}, self.source)

    def rows(self):
        """Deterministic ``(k, l, alpha, beta, gamma, method, num, den)`` rows."""
        out = []
        for (kv, sv), slot in sorted(self.values.items()):
            k = kv[0]
            l = kv[1] if len(kv) > 1 else ""
            sv = list(sv) + [""] * (3 - len(sv))
            for method in sorted(slot):
                num, den = num_den(slot[method])
                out.append([k, l, sv[0], sv[1], sv[2], method, num, den])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "l", "alpha", "beta", "gamma", "method", "value_num", "value_den"])
        w.writerows(self.rows())
        return buf.getvalue()

    def to_json(self) -> str:
        cols = ["k", "l", "alpha", "beta", "gamma", "method", "value_num", "value_den"]
        rows = [dict(zip(cols, r)) for r in self.rows()]
        return json.dumps({"n": self.n, "rows": rows}, indent=1) + "\n"


@dataclass(frozen=True)
class Grid:
    """Translation vectors and shift vectors whose product is evaluated."""

    k_vectors: tuple
    shift_vectors: tuple

    @classmethod
    def n2(cls, k_max: int, shift_max: int, k_min: int = 0) -> "Grid":
        ks = tuple((k,) for k in range(k_min, k_max + 1))
        sh = tuple(product(range(-shift_max, shift_max + 1), repeat=2))
        return cls(ks, sh)

    @classmethod
    def n3(cls, total_max: int, shift_max: int, each_max: int | None = None) -> "Grid":
        if each_max is None:
            ks = tuple((k, l) for k in range(total_max + 1) for l in range(total_max + 1 - k))
        else:
            ks = tuple((k, l) for k in range(each_max + 1) for l in range(each_max + 1))
        sh = tuple(product(range(-shift_max, shift_max + 1), repeat=3))
        return cls(ks, sh)

    def points(self):
        return product(self.k_vectors, self.shift_vectors)


def compute(arr: CoefficientArray, method: str, k_vector, shift_vector, order: int | None = None) -> Scalar:
    if method == "hankel":
        (k,) = k_vector
        return tau_hankel(arr, k, *shift_vector)
    if method == "residue":
        k, l = k_vector
        return tau_residue_3(arr, k, l, *shift_vector, order=order)
    if method == "minor":
        return matgroup.tau_minor(arr, k_vector, shift_vector)
    if method == "fock":
        return fock.tau_fock(arr, k_vector, shift_vector)
    raise ValueError(f"unknown method {method!r}")


def build_table(arr: CoefficientArray, grid: Grid, methods: Iterable[str]) -> TauTable:
    """Fill a table with every method; disagreements raise at insertion."""
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
        if m == "hankel" and arr.n != 2:
            raise ValueError("hankel needs n = 2")
        if m == "residue" and arr.n != 3:
            raise ValueError("residue needs n = 3")
    table = TauTable(arr.n, source=arr)
    for sv in grid.shift_vectors:
        if "fock" in methods:
            vals = fock.tau_fock_many(arr, grid.k_vectors, sv)
        for kv in grid.k_vectors:
            for m in methods:
                v = vals[tuple(kv)] if m == "fock" else compute(arr, m, kv, sv)
                table.insert(kv, sv, m, v)
    return table
