"""Moment arrays for strictly lower block-triangular group elements.

A :class:`CoefficientArray` stores, for every block ``(a, b)`` with
``a > b``, a finite map ``(i, j) -> value``.  The entry ``(i, j)`` of block
``(a, b)`` is the coefficient of the matrix unit sending ``e_b z^j`` to
``e_a z^(-i-1)``.  For two components the only block is ``(1, 0)`` and its
entries are the moments ``c_{i,j}``; for three components the blocks
``(1,0)``, ``(2,0)`` and ``(2,1)`` hold ``c``, ``d`` and ``e``.

Indices range over all of Z^2.  Moment functionals (:class:`Condition`)
apply the cutoff "negative index means zero"; the raw array does not.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .algebra import ZERO, LaurentPoly, Scalar, num_den, to_scalar

Block = tuple  # (a, b) with a > b


def block_pairs(n: int) -> list[tuple[int, int]]:
    """All strictly lower pairs, sorted the way the JSON format sorts them."""
    return sorted((a, b) for a in range(n) for b in range(a))


def parse_pair(text) -> tuple[int, int]:
    if isinstance(text, (tuple, list)):
        a, b = text
        return int(a), int(b)
    text = str(text)
    if len(text) != 2 or not text.isdigit():
        raise ValueError(f"bad block pair {text!r}")
    return int(text[0]), int(text[1])


def pair_name(block) -> str:
    return f"{block[0]}{block[1]}"


class ArrayFormatError(ValueError):
    """Raised for malformed coefficient files."""


@dataclass(frozen=True, eq=False)
class CoefficientArray:
    n: int
    blocks: Mapping  # {(a,b): {(i,j): Scalar}}

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two components")
        clean = {p: {} for p in block_pairs(self.n)}
        for block, entries in dict(self.blocks).items():
            block = parse_pair(block)
            if block not in clean:
                raise ValueError(f"block {block} is not strictly lower for n={self.n}")
            for (i, j), v in dict(entries).items():
                v = to_scalar(v)
                if v:
                    clean[block][(int(i), int(j))] = v
        object.__setattr__(self, "blocks", clean)

    @classmethod
    def zero(cls, n: int) -> "CoefficientArray":
        return cls(n, {})

    @classmethod
    def from_block(cls, entries: Mapping, n: int = 2, block=(1, 0)) -> "CoefficientArray":
        return cls(n, {block: entries})

    @cached_property
    def _key(self):
        return (self.n, tuple((b, tuple(sorted(e.items()))) for b, e in sorted(self.blocks.items())))

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        if not isinstance(other, CoefficientArray):
            return NotImplemented
        return self._key == other._key

    def __repr__(self):
        sizes = {pair_name(b): len(e) for b, e in sorted(self.blocks.items())}
        return f"CoefficientArray(n={self.n}, entries={sizes})"

    def get(self, block, i: int, j: int) -> Scalar:
        return self.blocks[parse_pair(block)].get((i, j), ZERO)

    def entries(self) -> Iterator[tuple[tuple[int, int], int, int, Scalar]]:
        """Yield ``(block, i, j, value)`` in canonical order."""
        for block in sorted(self.blocks):
            for (i, j), v in sorted(self.blocks[block].items()):
                yield block, i, j, v

    def support_box(self, block) -> tuple[int, int, int, int] | None:
        """``(imin, imax, jmin, jmax)`` for a block, or None when it is empty."""
        ent = self.blocks[parse_pair(block)]
        if not ent:
            return None
        ii = [i for i, _ in ent]
        jj = [j for _, j in ent]
        return min(ii), max(ii), min(jj), max(jj)

    def is_zero(self) -> bool:
        return not any(self.blocks.values())

    def max_index(self) -> int:
        """Largest |i| or |j| appearing anywhere, 0 for the zero array."""
        return max((max(abs(i), abs(j)) for b in self.blocks.values() for (i, j) in b), default=0)

    def scaled(self, factor) -> "CoefficientArray":
        f = to_scalar(factor)
        return CoefficientArray(self.n, {b: {k: v * f for k, v in e.items()} for b, e in self.blocks.items()})

    def with_entry(self, block, i: int, j: int, value) -> "CoefficientArray":
        blocks = {b: dict(e) for b, e in self.blocks.items()}
        blocks[parse_pair(block)][(i, j)] = to_scalar(value)
        return CoefficientArray(self.n, blocks)

    # JSON -------------------------------------------------------------
    def to_json_obj(self) -> dict:
        out = {"n": self.n, "blocks": []}
        for block in sorted(self.blocks):
            rows = []
            for (i, j), v in sorted(self.blocks[block].items()):
                num, den = num_den(v)
                rows.append({"i": i, "j": j, "num": num, "den": den})
            out["blocks"].append({"pair": pair_name(block), "entries": rows})
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json_obj(cls, obj) -> "CoefficientArray":
        try:
            n = obj["n"]
            if not isinstance(n, int) or isinstance(n, bool) or n < 2:
                raise ArrayFormatError(f"bad component count {n!r}")
            blocks = {}
            for blk in obj["blocks"]:
                pair = parse_pair(blk["pair"])
                if not (n > pair[0] > pair[1] >= 0):
                    raise ArrayFormatError(f"pair {blk['pair']} not strictly lower for n={n}")
                ent = {}
                for e in blk["entries"]:
                    if "m" in e:
                        raise ArrayFormatError("single-index entry in a two-index array")
                    vals = [e["i"], e["j"], e["num"], e["den"]]
                    if not all(isinstance(x, int) and not isinstance(x, bool) for x in vals):
                        raise ArrayFormatError(f"non-integer field in {e}")
                    if e["den"] == 0:
                        raise ArrayFormatError("zero denominator")
                    ent[(e["i"], e["j"])] = Scalar(e["num"], e["den"])
                blocks[pair] = ent
        except (KeyError, TypeError) as exc:
            raise ArrayFormatError(f"malformed coefficient file: {exc}") from exc
        return cls(n, blocks)

    @classmethod
    def from_json(cls, text: str) -> "CoefficientArray":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ArrayFormatError(str(exc)) from exc
        if isinstance(obj, dict) and obj.get("loop"):
            raise ArrayFormatError("file holds loop data; use looprestrict.QCoefficients")
        return cls.from_json_obj(obj)


def random_array(
    n: int,
    seed: int,
    box: tuple[int, int] = (4, 4),
    density: float = 1.0,
    num_range: int = 9,
    den_range: int = 4,
    origin: tuple[int, int] = (0, 0),
) -> CoefficientArray:
    """Seeded random array supported in ``origin + [0, box_i) x [0, box_j)`` per block.

    Numerators are drawn from ``[-num_range, num_range]`` and denominators
    from ``[1, den_range]``.  ``density`` is the probability that a cell is
    populated at all.
    """
    rng = random.Random(seed)
    blocks = {}
    for block in block_pairs(n):
        ent = {}
        for i in range(box[0]):
            for j in range(box[1]):
                if rng.random() < density:
                    ent[(i + origin[0], j + origin[1])] = Scalar(rng.randint(-num_range, num_range), rng.randint(1, den_range))
        blocks[block] = ent
    return CoefficientArray(n, blocks)


# ---------------------------------------------------------------------------
# shifts


def shift(arr: CoefficientArray, block, alpha: int, beta: int) -> CoefficientArray:
    """Relabel one block so that the new entry at ``(k, l)`` is the old ``(k+alpha, l+beta)``."""
    block = parse_pair(block)
    if block not in arr.blocks:
        raise KeyError(f"unknown block {block}")
    if alpha == 0 and beta == 0:
        return arr
    blocks = dict(arr.blocks)
    blocks[block] = {(i - alpha, j - beta): v for (i, j), v in arr.blocks[block].items()}
    return CoefficientArray(arr.n, blocks)


def shift_all(arr: CoefficientArray, alpha: int, beta: int) -> CoefficientArray:
    out = arr
    for block in block_pairs(arr.n):
        out = shift(out, block, alpha, beta)
    return out


def conjugate(arr: CoefficientArray, shift_vector: Sequence[int]) -> CoefficientArray:
    """Array of the element conjugated by ``Q_0^s0 ... Q_{n-1}^s_{n-1}``.

    Conjugating by the translation of component ``c`` lowers the ``i`` index
    of every block whose target is ``c`` and raises the ``j`` index of every
    block whose source is ``c``.  In block ``(a, b)`` the new entry at
    ``(i, j)`` is the old one at ``(i - s_a, j + s_b)``.
    """
    if len(shift_vector) != arr.n:
        raise ValueError(f"shift vector needs {arr.n} entries")
    out = arr
    for a, b in block_pairs(arr.n):
        out = shift(out, (a, b), -shift_vector[a], shift_vector[b])
    return out


def shift_field_expand(arr: CoefficientArray, block, direction, sign: str, order: int):
    """Series coefficients of a shift field applied to the generators of one block.

    The "+" field is ``1 - S/y`` and the "-" field is its inverse
    ``sum_m S^m y^-m``.  Entry ``m`` of the result is ``(m, A_m)`` where
    ``A_m`` is the array multiplying ``y^-m``: for the "+" field this is the
    negated shifted array at ``m = 1``.  Blocks other than ``block`` are
    carried along unchanged in the ``m = 0`` term and dropped from the
    others, so summing the series blockwise gives the transformed array.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    direction = tuple(direction)
    if direction not in {(1, 0), (-1, 0), (0, 1), (0, -1)}:
        raise ValueError(f"bad direction {direction}")
    block = parse_pair(block)
    if block not in arr.blocks:
        raise KeyError(f"unknown block {block}")
    only = CoefficientArray(arr.n, {block: arr.blocks[block]})
    if sign == "+":
        terms = [(0, arr)]
        if order >= 1:
            terms.append((1, shift(only, block, *direction).scaled(-1)))
        return terms
    if sign != "-":
        raise ValueError("sign must be '+' or '-'")
    terms = [(0, arr)]
    for m in range(1, order + 1):
        terms.append((m, shift(only, block, m * direction[0], m * direction[1])))
    return terms


# ---------------------------------------------------------------------------
# moment functionals


@dataclass(eq=False)
class Condition:
    """The moment functional ``z^k w^l -> b_{k,l}`` of one block, zero at negative indices."""

    array: CoefficientArray
    block: tuple = (1, 0)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.block = parse_pair(self.block)
        if self.block not in self.array.blocks:
            raise KeyError(f"unknown block {self.block}")

    def moment(self, k: int, l: int) -> Scalar:
        if k < 0 or l < 0:
            return ZERO
        key = (k, l)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.array.blocks[self.block].get(key, ZERO)
            self._cache[key] = hit
        return hit


def condition_eval(c: Condition, f: LaurentPoly) -> Scalar:
    if len(f.variables) != 2:
        raise ValueError("a single condition acts on a polynomial in one (z, w) pair")
    total = ZERO
    for (k, l), coeff in f.terms.items():
        m = c.moment(k, l)
        if m:
            total += coeff * m
    return total


def product_condition_eval(cs: Sequence[Condition], f: LaurentPoly) -> Scalar:
    """Apply ``c_1 x ... x c_e``; variables are read as ``(z_1, w_1, z_2, w_2, ...)``."""
    if len(f.variables) != 2 * len(cs):
        raise ValueError(f"{len(f.variables)} variables but {len(cs)} conditions")
    total = ZERO
    for exps, coeff in f.terms.items():
        prod = coeff
        for idx, c in enumerate(cs):
            m = c.moment(exps[2 * idx], exps[2 * idx + 1])
            if not m:
                prod = ZERO
                break
            prod *= m
        if prod:
            total += prod
    return total


def pair_variables(count: int, z: str = "z", w: str = "w") -> tuple[str, ...]:
    names: list[str] = []
    for i in range(1, count + 1):
        names += [f"{z}{i}", f"{w}{i}"]
    return tuple(names)


def moment_matrix(arr: CoefficientArray, k: int, block=(1, 0)) -> list[list[Scalar]]:
    """The k x k moment matrix with cutoff, entry (i, j) = b_{j,i}."""
    c = Condition(arr, block)
    return [[c.moment(j, i) for j in range(k)] for i in range(k)]


def iter_grid(*ranges: Iterable[int]):
    from itertools import product

    return product(*ranges)
