"""A window-truncated semi-infinite wedge engine.

Basis vectors ``e_a z^k`` are encoded as integers ``m = n*k + a``; sorting
the integers is the same as sorting labels by ``(k, a)``.  An elementary
wedge is the ascending wedge product of its occupied labels.  Inside the
window ``[-K, K)`` (in powers) a wedge is a bitmask; labels above the window
are implicitly occupied and labels below it implicitly empty, so every sign
only depends on the bits that are stored.

This module is the brute-force referee for everything else: it knows
nothing about determinants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .algebra import ONE, ZERO, Scalar, to_scalar
from .conditions import CoefficientArray, conjugate


class WindowOverflow(ValueError):
    """An operation touched a label outside the active window."""


@dataclass(frozen=True)
class Window:
    n: int
    K: int

    @property
    def size(self) -> int:
        return 2 * self.n * self.K

    def index(self, a: int, k: int) -> int:
        if not (0 <= a < self.n):
            raise ValueError(f"component {a} out of range for n={self.n}")
        if not (-self.K <= k < self.K):
            raise WindowOverflow(f"power {k} outside window [-{self.K}, {self.K})")
        return self.n * (k + self.K) + a

    def label(self, idx: int) -> tuple[int, int]:
        k, a = divmod(idx, self.n)
        return a, k - self.K

    @property
    def vacuum_mask(self) -> int:
        half = self.n * self.K
        return ((1 << half) - 1) << half

    def component_masks(self) -> list[int]:
        masks = [0] * self.n
        for idx in range(self.size):
            masks[idx % self.n] |= 1 << idx
        return masks

    def degree(self, mask: int) -> tuple[int, ...]:
        """Charge per component: occupied count minus the vacuum's."""
        return tuple((mask & cm).bit_count() - self.K for cm in _comp_masks(self))


_MASK_CACHE: dict = {}


def _comp_masks(win: Window) -> list[int]:
    hit = _MASK_CACHE.get(win)
    if hit is None:
        hit = win.component_masks()
        _MASK_CACHE[win] = hit
    return hit


class FockVector:
    """Finite rational combination of elementary wedges inside one window."""

    __slots__ = ("window", "terms")

    def __init__(self, window: Window, terms: Mapping[int, Scalar] | None = None):
        self.window = window
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def vacuum(cls, window: Window) -> "FockVector":
        return cls(window, {window.vacuum_mask: ONE})

    @classmethod
    def wedge(cls, window: Window, labels: Iterable[tuple[int, int]], coeff=1) -> "FockVector":
        """Wedge that differs from the vacuum inside the window by ``labels``.

        ``labels`` lists every occupied in-window label; the result is the
        canonically ordered wedge.
        """
        mask = 0
        for a, k in labels:
            mask |= 1 << window.index(a, k)
        return cls(window, {mask: to_scalar(coeff)})

    def __add__(self, other: "FockVector") -> "FockVector":
        _same(self, other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
        return FockVector(self.window, out)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + other.scale(-1)

    def scale(self, c) -> "FockVector":
        c = to_scalar(c)
        return FockVector(self.window, {m: v * c for m, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, FockVector):
            return NotImplemented
        return self.window == other.window and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[tuple[int, ...]]:
        return {self.window.degree(m) for m in self.terms}

    def occupied(self, mask: int) -> list[tuple[int, int]]:
        return [self.window.label(i) for i in range(self.window.size) if mask >> i & 1]

    def __repr__(self):
        return f"FockVector(n={self.window.n}, K={self.window.K}, terms={len(self.terms)})"


def _same(u: FockVector, v: FockVector):
    if u.window != v.window:
        raise ValueError("vectors live in different windows")


def _below(mask: int, idx: int) -> int:
    return (mask & ((1 << idx) - 1)).bit_count()


def _create(mask: int, idx: int) -> tuple[int, int]:
    """(sign, new mask); sign 0 means the result vanishes."""
    bit = 1 << idx
    if mask & bit:
        return 0, mask
    return (-1 if _below(mask, idx) & 1 else 1), mask | bit


def _annihilate(mask: int, idx: int) -> tuple[int, int]:
    bit = 1 << idx
    if not mask & bit:
        return 0, mask
    return (-1 if _below(mask, idx) & 1 else 1), mask & ~bit


def wedge_op(v: FockVector, a: int, k: int, kind: str) -> FockVector:
    """``e_a z^k`` wedged on the left (``create``) or contracted (``annihilate``)."""
    idx = v.window.index(a, k)
    op = {"create": _create, "annihilate": _annihilate}.get(kind)
    if op is None:
        raise ValueError(f"unknown kind {kind!r}")
    out: dict = {}
    for mask, c in v.terms.items():
        s, new = op(mask, idx)
        if s:
            out[new] = out.get(new, ZERO) + (c if s > 0 else -c)
    return FockVector(v.window, out)


def create(v: FockVector, a: int, k: int) -> FockVector:
    return wedge_op(v, a, k, "create")


def annihilate(v: FockVector, a: int, k: int) -> FockVector:
    return wedge_op(v, a, k, "annihilate")


def pairing(u: FockVector, v: FockVector) -> Scalar:
    """Bilinear form making elementary wedges orthonormal."""
    _same(u, v)
    if len(u.terms) > len(v.terms):
        u, v = v, u
    total = ZERO
    for m, c in u.terms.items():
        d = v.terms.get(m)
        if d is not None:
            total += c * d
    return total


# ---------------------------------------------------------------------------
# translation operators


def _apply_ops(mask: int, ops: Sequence[tuple[str, int]]) -> tuple[int, int]:
    """Apply an operator word (leftmost acts last) to a single wedge."""
    sign = 1
    for kind, idx in reversed(ops):
        s, mask = (_create if kind == "c" else _annihilate)(mask, idx)
        if not s:
            return 0, mask
        sign *= s
    return sign, mask


def _q_step(mask: int, win: Window, a: int, up: bool) -> tuple[int, int]:
    """One application of ``Q_a`` (``up=False``) or ``Q_a^-1`` (``up=True``).

    The wedge is written as ``M v0`` with ``M`` a word of creators for the
    negative labels and annihilators for the missing nonnegative labels.
    Moving the translation through ``M`` shifts the component-``a`` factors
    by one power and picks up a sign for every factor of another component;
    what remains is ``Q_a v0 = e_a z^-1 ^ v0`` or ``Q_a^-1 v0 = i(e_a z^0) v0``.
    """
    n, half = win.n, win.n * win.K
    ops: list[tuple[str, int]] = []
    for idx in range(half):
        if mask >> idx & 1:
            ops.append(("c", idx))
    for idx in range(half, win.size):
        if not mask >> idx & 1:
            ops.append(("a", idx))
    sigma, check = _apply_ops(win.vacuum_mask, ops)
    assert sigma and check == mask
    step = n if up else -n
    shifted = []
    others = 0
    for kind, idx in ops:
        if idx % n == a:
            new = idx + step
            if not (0 <= new < win.size):
                raise WindowOverflow("translation pushed a label out of the window")
            shifted.append((kind, new))
        else:
            others += 1
            shifted.append((kind, idx))
    if up:
        s0, base = _annihilate(win.vacuum_mask, win.index(a, 0))
    else:
        s0, base = _create(win.vacuum_mask, win.index(a, -1))
    s1, out = _apply_ops(base, shifted)
    if not s1:
        raise WindowOverflow("translation image is not representable in this window")
    sign = sigma * s0 * s1 * (-1 if others & 1 else 1)
    return sign, out


def q_op(v: FockVector, a: int, exponent: int) -> FockVector:
    """Apply ``Q_a ** exponent``."""
    if not (0 <= a < v.window.n):
        raise ValueError(f"component {a} out of range")
    cur = v
    for _ in range(abs(exponent)):
        out: dict = {}
        for mask, c in cur.terms.items():
            s, new = _q_step(mask, v.window, a, up=exponent < 0)
            out[new] = out.get(new, ZERO) + (c if s > 0 else -c)
        cur = FockVector(v.window, out)
    return cur


def t_op(v: FockVector, i: int, exponent: int) -> FockVector:
    """Apply ``T_i ** exponent`` with ``T_i = Q_i Q_{i-1}^-1``."""
    if not (1 <= i < v.window.n):
        raise ValueError(f"T_{i} undefined for n={v.window.n}")
    cur = v
    for _ in range(abs(exponent)):
        if exponent > 0:
            cur = q_op(q_op(cur, i - 1, -1), i, 1)
        else:
            cur = q_op(q_op(cur, i, -1), i - 1, 1)
    return cur


def translation_vacuum(n: int, k_vector: Sequence[int], window: Window | None = None) -> FockVector:
    """``T_1^k1 T_2^k2 ... T_{n-1}^k_{n-1} v0`` (the last factor acts first)."""
    if len(k_vector) != n - 1:
        raise ValueError(f"k_vector needs {n - 1} entries")
    if window is None:
        window = Window(n, sum(abs(k) for k in k_vector) + 2)
    v = FockVector.vacuum(window)
    for i in range(n - 1, 0, -1):
        v = t_op(v, i, k_vector[i - 1])
    return v


def translation_degree(n: int, k_vector: Sequence[int]) -> tuple[int, ...]:
    """Charge of ``T^k v0``, read off from the engine rather than assumed."""
    return next(iter(translation_vacuum(n, k_vector).degrees()))


# ---------------------------------------------------------------------------
# group elements


def _targets_by_source(arr: CoefficientArray, win: Window) -> list[tuple[int, int, list[tuple[int, Scalar]]]]:
    """``[(component, source index, [(target index, value), ...]), ...]``."""
    cols: dict = {}
    for (a, b), i, j, v in arr.entries():
        src = win.index(b, j)
        tgt = win.index(a, -i - 1)
        cols.setdefault((b, src), []).append((tgt, v))
    return [(b, src, sorted(t)) for (b, src), t in sorted(cols.items(), key=lambda kv: (-kv[0][0], kv[0][1]))]


def _reachable(deg: tuple, targets: Sequence[tuple], top: int) -> bool:
    """Can further moves out of components ``<= top`` turn ``deg`` into a target?"""
    for t in targets:
        d = [x - y for x, y in zip(t, deg)]
        if sum(d):
            continue
        ok = True
        run = 0
        for a, da in enumerate(d):
            run += da
            if run > 0 or (a > top and da < 0):
                ok = False
                break
        if ok:
            return True
    return False


def apply_group_element(
    v: FockVector,
    arr: CoefficientArray,
    shift_vector: Sequence[int] | None = None,
    targets: Sequence[tuple] | None = None,
) -> FockVector:
    """Apply the group element ``I + sum_blocks`` to ``v``.

    A group element acts on a wedge by replacing every factor ``e_c`` with
    ``g e_c``.  Here that is done one source label at a time, highest
    component first, using ``1 + sum_r x_rc create(r) annihilate(c)``; the
    new factors land in higher components and are never revisited.

    ``targets`` optionally restricts the output to wedges that can still
    reach one of the listed charges, which keeps the expansion small when
    only a few matrix elements are wanted.
    """
    if shift_vector is not None and any(shift_vector):
        arr = conjugate(arr, shift_vector)
    win = v.window
    if arr.n != win.n:
        raise ValueError("array and window disagree on n")
    columns = _targets_by_source(arr, win)
    terms = dict(v.terms)
    current_comp = None
    for comp, src, tgts in columns:
        if targets is not None and comp != current_comp:
            terms = {m: c for m, c in terms.items() if _reachable(win.degree(m), targets, comp)}
            current_comp = comp
        bit = 1 << src
        new = dict(terms)
        for mask, c in terms.items():
            if not mask & bit:
                continue
            s1 = -1 if _below(mask, src) & 1 else 1
            rest = mask & ~bit
            for tgt, x in tgts:
                tb = 1 << tgt
                if rest & tb:
                    continue
                s = s1 * (-1 if _below(rest, tgt) & 1 else 1)
                key = rest | tb
                val = c * x
                new[key] = new.get(key, ZERO) + (val if s > 0 else -val)
        terms = {m: c for m, c in new.items() if c}
    if targets is not None:
        terms = {m: c for m, c in terms.items() if win.degree(m) in set(map(tuple, targets))}
    return FockVector(win, terms)


def auto_window(arr: CoefficientArray, k_vectors: Iterable[Sequence[int]], shift_vector: Sequence[int] | None = None) -> int:
    ext = arr.max_index() + 1
    sh = max((abs(s) for s in shift_vector or ()), default=0)
    kk = max((sum(abs(k) for k in kv) for kv in k_vectors), default=0)
    return ext + sh + kk + 2


def tau_fock_many(
    arr: CoefficientArray,
    k_vectors: Sequence[Sequence[int]],
    shift_vector: Sequence[int] | None = None,
    K: int | None = None,
) -> dict[tuple, Scalar]:
    """Several matrix elements ``<T^k v0, g v0>`` sharing one expansion of ``g v0``."""
    n = arr.n
    shift_vector = tuple(shift_vector or (0,) * n)
    k_vectors = [tuple(kv) for kv in k_vectors]
    if K is None:
        K = auto_window(arr, k_vectors, shift_vector)
    win = Window(n, K)
    duals = {}
    for kv in k_vectors:
        t = translation_vacuum(n, kv, win)
        (mask, sign), = t.terms.items()
        duals[kv] = (mask, sign)
    targets = sorted({win.degree(mask) for mask, _ in duals.values()})
    gv = apply_group_element(FockVector.vacuum(win), arr, shift_vector, targets=targets)
    return {kv: gv.terms.get(mask, ZERO) * sign for kv, (mask, sign) in duals.items()}


def tau_fock(arr: CoefficientArray, k_vector: Sequence[int], shift_vector: Sequence[int] | None = None, K: int | None = None) -> Scalar:
    return tau_fock_many(arr, [k_vector], shift_vector, K)[tuple(k_vector)]


# ---------------------------------------------------------------------------
# fields at rational points


def field_at(v: FockVector, a: int, z, kind: str) -> FockVector:
    """``psi^+_a(z)`` (``kind='+'``) or ``psi^-_a(z)`` (``kind='-'``) summed over the window.

    ``psi^+(z) = sum_k create(k) z^(-k-1)`` and ``psi^-(z) = sum_p annihilate(p) z^p``.
    Terms that vanish are never evaluated, so ``z = 0`` is allowed whenever
    the surviving powers are nonnegative.
    """
    win = v.window
    z = to_scalar(z)
    out = FockVector(win, {})
    for k in range(-win.K, win.K):
        piece = wedge_op(v, a, k, "create" if kind == "+" else "annihilate")
        if piece.is_zero():
            continue
        power = -k - 1 if kind == "+" else k
        out = out + piece.scale(z ** power)
    return out


def e10_at(v: FockVector, z, w) -> FockVector:
    """``E_10(z, w) = psi^+_1(z) psi^-_0(w)`` applied to ``v``."""
    return field_at(field_at(v, 0, w, "-"), 1, z, "+")


def correlation(k: int, points: Sequence[tuple], window: Window | None = None) -> Scalar:
    """``<T^k v0, E_10(z_k, w_k) ... E_10(z_1, w_1) v0>`` for two components."""
    if len(points) != k:
        raise ValueError("need exactly k points")
    win = window or Window(2, k + 2)
    v = FockVector.vacuum(win)
    for z, w in points:
        v = e10_at(v, z, w)
    return pairing(translation_vacuum(2, [k], win), v)
