"""Exact scalars, small dense matrices, determinants and sparse Laurent polynomials.

Everything here is exact.  Scalars are ``gmpy2.mpq`` rationals, which are
always reduced with a positive denominator; ``to_scalar`` accepts ints,
``fractions.Fraction``, strings like ``"-3/4"`` and mpq values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import gmpy2
from gmpy2 import mpq, mpz

Scalar = gmpy2.mpq

ZERO = mpq(0)
ONE = mpq(1)


def to_scalar(x) -> "mpq":
    """Coerce ``x`` into an exact rational."""
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (float, complex)):
        raise TypeError("floats are not accepted; pass an exact rational")
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def as_fraction(x) -> Fraction:
    x = to_scalar(x)
    return Fraction(int(x.numerator), int(x.denominator))


def num_den(x) -> tuple[int, int]:
    x = to_scalar(x)
    return int(x.numerator), int(x.denominator)


def factorial(m: int) -> "mpq":
    return mpq(gmpy2.fac(m))


# ---------------------------------------------------------------------------
# dense matrices


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class DenseMatrix:
    """A rectangular grid of exact rationals.

    ``entries`` is a tuple of row tuples.  An ``r x 0`` or ``0 x c`` shape is
    stored through the explicit ``rows``/``cols`` counts.
    """

    rows: int
    cols: int
    entries: tuple

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "DenseMatrix":
        data = tuple(tuple(to_scalar(x) for x in row) for row in rows)
        ncols = cols if cols is not None else (len(data[0]) if data else 0)
        for row in data:
            if len(row) != ncols:
                raise ShapeError("ragged rows")
        return cls(len(data), ncols, data)

    @classmethod
    def identity(cls, size: int) -> "DenseMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(size)] for i in range(size)], size)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else ())

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "DenseMatrix":
        return DenseMatrix(len(rows), len(cols), tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    def __matmul__(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        ot = other.transpose().entries
        out = []
        for row in self.entries:
            out.append(tuple(sum((a * b for a, b in zip(row, col) if a and b), ZERO) for col in ot))
        return DenseMatrix(self.rows, other.cols, tuple(out))

    def tolist(self) -> list[list]:
        return [list(r) for r in self.entries]


def det(m) -> "mpq":
    """Determinant by fraction-free (Bareiss) elimination.

    Each row is first scaled to integers by the lcm of its denominators, the
    integer matrix is reduced with exact divisions, and the scaling is undone
    at the end.  Accepts a ``DenseMatrix`` or a list of rows.
    """
    if isinstance(m, DenseMatrix):
        if not m.is_square:
            raise ShapeError(f"determinant of a {m.rows}x{m.cols} matrix")
        rows = m.entries
    else:
        rows = [list(r) for r in m]
        if any(len(r) != len(rows) for r in rows):
            raise ShapeError("determinant of a non-square matrix")
    size = len(rows)
    if size == 0:
        return ONE
    scale = mpz(1)
    work: list[list] = []
    for row in rows:
        row = [to_scalar(x) for x in row]
        lcm = mpz(1)
        for x in row:
            if x:
                lcm = gmpy2.lcm(lcm, x.denominator)
        scale *= lcm
        work.append([x.numerator * (lcm // x.denominator) for x in row])
    sign = 1
    prev = mpz(1)
    for k in range(size - 1):
        if not work[k][k]:
            for r in range(k + 1, size):
                if work[r][k]:
                    work[k], work[r] = work[r], work[k]
                    sign = -sign
                    break
            else:
                return ZERO
        pivot = work[k][k]
        rowk = work[k]
        for i in range(k + 1, size):
            rowi = work[i]
            lead = rowi[k]
            for j in range(k + 1, size):
                rowi[j] = (pivot * rowi[j] - lead * rowk[j]) // prev
            rowi[k] = mpz(0)
        prev = pivot
    return mpq(sign * work[-1][-1], scale)


def vandermonde(points: Sequence) -> DenseMatrix:
    """Square matrix whose row ``r`` holds the points raised to the power ``r``."""
    pts = [to_scalar(p) for p in points]
    return DenseMatrix.from_rows([[p ** r for p in pts] for r in range(len(pts))], len(pts))


def desnanot_jacobi_check(m: DenseMatrix) -> bool:
    """Test the condensation identity on ``m``.

    det(M) det(M_interior) == det(M_NW) det(M_SE) - det(M_NE) det(M_SW), the
    corner minors deleting one extreme row and one extreme column each.  A
    2x2 matrix has an empty interior whose determinant is 1.
    """
    if not m.is_square:
        raise ShapeError("condensation needs a square matrix")
    size = m.rows
    if size < 2:
        raise ShapeError("condensation needs size >= 2")
    inner = range(1, size - 1)
    no_last = range(0, size - 1)
    no_first = range(1, size)
    lhs = det(m) * det(m.submatrix(inner, inner))
    rhs = det(m.submatrix(no_last, no_last)) * det(m.submatrix(no_first, no_first)) - det(
        m.submatrix(no_last, no_first)
    ) * det(m.submatrix(no_first, no_last))
    return lhs == rhs


def solve_right(a: list[list], b: list[list]) -> list[list] | None:
    """Return X with X @ a == b, or None when ``a`` is singular.

    ``a`` is square (size s), ``b`` has s columns.  Plain Gauss-Jordan on
    exact rationals; the systems met in practice are small.
    """
    size = len(a)
    if size == 0:
        return [[] for _ in b]
    # X a = b  <=>  a^T X^T = b^T
    aug = [[a[j][i] for j in range(size)] + [row[i] for row in b] for i in range(size)]
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col]), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        prow = aug[col]
        inv = 1 / prow[col]
        if inv != 1:
            prow = [x * inv for x in prow]
            aug[col] = prow
        for r in range(size):
            if r != col:
                f = aug[r][col]
                if f:
                    rr = aug[r]
                    aug[r] = [x - f * y if y else x for x, y in zip(rr, prow)]
    # column t of X^T is row t of X
    return [[aug[i][size + t] for i in range(size)] for t in range(len(b))]


# ---------------------------------------------------------------------------
# Laurent polynomials


@dataclass(frozen=True)
class LaurentPoly:
    """Sparse multivariate Laurent polynomial with rational coefficients.

    ``terms`` maps exponent tuples (one entry per variable, negatives
    allowed) to nonzero scalars.  The empty map is zero, so equality is
    structural once the variable lists agree.
    """

    variables: tuple
    terms: Mapping

    def __post_init__(self):
        clean = {}
        nv = len(self.variables)
        for exps, coeff in dict(self.terms).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nv:
                raise ValueError(f"exponent vector {exps} does not match variables {self.variables}")
            coeff = to_scalar(coeff)
            if coeff:
                clean[exps] = clean.get(exps, ZERO) + coeff
                if not clean[exps]:
                    del clean[exps]
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "terms", clean)

    # construction helpers
    @classmethod
    def constant(cls, variables: Sequence[str], value=1) -> "LaurentPoly":
        return cls(tuple(variables), {(0,) * len(variables): value})

    @classmethod
    def monomial(cls, variables: Sequence[str], exponents: Mapping[str, int] | Sequence[int], coeff=1):
        variables = tuple(variables)
        if isinstance(exponents, Mapping):
            unknown = set(exponents) - set(variables)
            if unknown:
                raise KeyError(f"unknown variables {sorted(unknown)}")
            exps = tuple(exponents.get(v, 0) for v in variables)
        else:
            exps = tuple(exponents)
        return cls(variables, {exps: coeff})

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "LaurentPoly":
        return cls(tuple(variables), {})

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.variables == other.variables:
            return self.terms == other.terms
        a, b = _align(self, other)
        return a.terms == b.terms

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponents: Mapping[str, int]) -> "mpq":
        key = tuple(exponents.get(v, 0) for v in self.variables)
        return self.terms.get(key, ZERO)

    def with_variables(self, variables: Sequence[str]) -> "LaurentPoly":
        """Re-express over a variable list containing all present variables."""
        variables = tuple(variables)
        pos = []
        for v in self.variables:
            if v not in variables:
                raise KeyError(v)
            pos.append(variables.index(v))
        out = {}
        for exps, c in self.terms.items():
            new = [0] * len(variables)
            for p, e in zip(pos, exps):
                new[p] = e
            out[tuple(new)] = c
        return LaurentPoly(variables, out)

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(self.variables, other)
        a, b = _align(self, other)
        out = dict(a.terms)
        for k, v in b.terms.items():
            out[k] = out.get(k, ZERO) + v
        return LaurentPoly(a.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.variables, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(self.variables, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            c = to_scalar(other)
            return LaurentPoly(self.variables, {k: v * c for k, v in self.terms.items()})
        return laurent_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("only nonnegative powers")
        out = LaurentPoly.constant(self.variables)
        for _ in range(e):
            out = out * self
        return out

    def residue(self, variable: str) -> "LaurentPoly":
        return laurent_residue(self, variable)

    def __repr__(self):
        if not self.terms:
            return "LaurentPoly(0)"
        parts = []
        for exps in sorted(self.terms):
            mono = "*".join(f"{v}^{e}" for v, e in zip(self.variables, exps) if e)
            parts.append(f"({self.terms[exps]})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _align(p: LaurentPoly, q: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    if p.variables == q.variables:
        return p, q
    merged = list(p.variables)
    merged += [v for v in q.variables if v not in merged]
    return p.with_variables(merged), q.with_variables(merged)


def laurent_mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    p, q = _align(p, q)
    out: dict = {}
    for e1, c1 in p.terms.items():
        for e2, c2 in q.terms.items():
            key = tuple(a + b for a, b in zip(e1, e2))
            out[key] = out.get(key, ZERO) + c1 * c2
    return LaurentPoly(p.variables, out)


def laurent_residue(p: LaurentPoly, variable: str) -> LaurentPoly:
    """Coefficient of ``variable**-1``, as a polynomial in the other variables."""
    if variable not in p.variables:
        raise KeyError(f"unknown variable {variable!r}")
    idx = p.variables.index(variable)
    rest = p.variables[:idx] + p.variables[idx + 1 :]
    out = {}
    for exps, c in p.terms.items():
        if exps[idx] == -1:
            out[exps[:idx] + exps[idx + 1 :]] = c
    return LaurentPoly(rest, out)


def poly_det(rows: Sequence[Sequence[LaurentPoly]]) -> LaurentPoly:
    """Determinant of a small matrix of Laurent polynomials by Leibniz expansion."""
    size = len(rows)
    if size == 0:
        raise ShapeError("use a variable list for the empty determinant")
    variables = rows[0][0].variables
    total = LaurentPoly.zero(variables)
    for perm in _permutations_with_sign(size):
        sign, order = perm
        term = LaurentPoly.constant(variables, sign)
        for i, j in enumerate(order):
            term = term * rows[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


def _permutations_with_sign(size: int):
    from itertools import permutations

    for order in permutations(range(size)):
        inversions = sum(1 for i, j in combinations(range(size), 2) if order[i] > order[j])
        yield (-1) ** inversions, order


def vandermonde_product(points: Iterable) -> "mpq":
    """The closed form prod_{i<j} (p_j - p_i)."""
    pts = [to_scalar(p) for p in points]
    out = ONE
    for i, j in combinations(range(len(pts)), 2):
        out *= pts[j] - pts[i]
    return out
