"""Exact arithmetic kernel.

Elements of the Prüfer group Z(p^inf) as reduced fractions mod 1, and dense
integer matrices with column-style Hermite and Smith normal forms. Every
lattice question asked elsewhere in the package (ideal membership, kernels,
subquotients) is answered with the helpers at the bottom of this module.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

from injres.errors import PrimeMismatchError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PruferElt:
    """num / p^expo mod 1, kept reduced so equality is field-wise."""

    p: int
    num: int = 0
    expo: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f'not a prime: {self.p}')
        num, expo = self.num, self.expo
        if expo <= 0:
            num, expo = 0, 0
        else:
            num %= self.p**expo
            while expo > 0 and num % self.p == 0:
                num //= self.p
                expo -= 1
            if num == 0:
                expo = 0
        object.__setattr__(self, 'num', num)
        object.__setattr__(self, 'expo', expo)

    @classmethod
    def zero(cls, p: int) -> PruferElt:
        return cls(p)

    @classmethod
    def from_fraction(cls, p: int, value: Fraction) -> PruferElt:
        den = value.denominator
        expo = 0
        while den % p == 0:
            den //= p
            expo += 1
        if den != 1:
            raise ValueError(f'{value} has a denominator that is not a power of {p}')
        return cls(p, value.numerator, expo)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.p**self.expo)

    @property
    def order(self) -> int:
        return self.p**self.expo

    def is_zero(self) -> bool:
        return self.num == 0

    def __add__(self, other: PruferElt) -> PruferElt:
        return prufer_add(self, other)

    def __neg__(self) -> PruferElt:
        return PruferElt(self.p, -self.num, self.expo)

    def __sub__(self, other: PruferElt) -> PruferElt:
        return prufer_add(self, -other)

    def __mul__(self, n: int) -> PruferElt:
        return prufer_scale(n, self)

    __rmul__ = __mul__

    def __str__(self) -> str:
        if self.num == 0:
            return '0'
        return f'{self.num}/{self.p}^{self.expo}'


def prufer_add(a: PruferElt, b: PruferElt) -> PruferElt:
    if a.p != b.p:
        raise PrimeMismatchError(f'cannot add elements of Z({a.p}^inf) and Z({b.p}^inf)')
    p = a.p
    expo = max(a.expo, b.expo)
    num = a.num * p ** (expo - a.expo) + b.num * p ** (expo - b.expo)
    return PruferElt(p, num, expo)


def prufer_scale(n: int, a: PruferElt) -> PruferElt:
    return PruferElt(a.p, n * a.num, a.expo)


def additive_order(a: PruferElt) -> int:
    return a.order


def prufer_elements(p: int, k: int) -> Iterator[PruferElt]:
    """All elements of order dividing p^k."""
    for num in range(p**k):
        yield PruferElt(p, num, k)


def p_valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError('valuation of zero')
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class IntMatrix:
    nrows: int
    ncols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.nrows or any(
            len(row) != self.ncols for row in self.entries
        ):
            raise ValueError(f'entries do not match shape {self.nrows}x{self.ncols}')

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
        rows = tuple(tuple(int(v) for v in row) for row in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        return cls(len(rows), ncols, rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: int) -> IntMatrix:
        columns = [tuple(col) for col in columns]
        rows = tuple(tuple(col[i] for col in columns) for i in range(nrows))
        return cls(nrows, len(columns), rows)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> IntMatrix:
        return cls(nrows, ncols, tuple((0,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls.diagonal([1] * n, n, n)

    @classmethod
    def diagonal(cls, values: Sequence[int], nrows: int, ncols: int) -> IntMatrix:
        rows = [[0] * ncols for _ in range(nrows)]
        for i, v in enumerate(values):
            rows[i][i] = v
        return cls.from_rows(rows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_columns(self.entries, self.ncols)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f'shape mismatch {self.shape} @ {other.shape}')
        cols = other.columns()
        rows = [
            [sum(a * b for a, b in zip(row, col, strict=True)) for col in cols]
            for row in self.entries
        ]
        return IntMatrix.from_rows(rows, other.ncols)

    def __add__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise ValueError(f'shape mismatch {self.shape} + {other.shape}')
        rows = [
            [a + b for a, b in zip(r, s, strict=True)]
            for r, s in zip(self.entries, other.entries, strict=True)
        ]
        return IntMatrix.from_rows(rows, self.ncols)

    def __neg__(self) -> IntMatrix:
        return self.scale(-1)

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        return self + (-other)

    def scale(self, k: int) -> IntMatrix:
        return IntMatrix.from_rows([[k * v for v in row] for row in self.entries], self.ncols)

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        if len(vector) != self.ncols:
            raise ValueError(f'vector of length {len(vector)} for {self.shape} matrix')
        return tuple(sum(a * b for a, b in zip(row, vector, strict=True)) for row in self.entries)

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.nrows != other.nrows:
            raise ValueError('hstack needs equal row counts')
        return IntMatrix.from_rows(
            [r + s for r, s in zip(self.entries, other.entries, strict=True)],
            self.ncols + other.ncols,
        )

    def vstack(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.ncols:
            raise ValueError('vstack needs equal column counts')
        return IntMatrix(self.nrows + other.nrows, self.ncols, self.entries + other.entries)

    def select_rows(self, indices: Iterable[int]) -> IntMatrix:
        return IntMatrix.from_rows([self.entries[i] for i in indices], self.ncols)

    def select_columns(self, indices: Iterable[int]) -> IntMatrix:
        return IntMatrix.from_columns([self.column(j) for j in indices], self.nrows)

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.entries for v in row)

    def is_diagonal(self) -> bool:
        return all(
            v == 0 for i, row in enumerate(self.entries) for j, v in enumerate(row) if i != j
        )

    def diagonal_entries(self) -> tuple[int, ...]:
        return tuple(self.entries[i][i] for i in range(min(self.shape)))

    def to_lists(self) -> list[list[int]]:
        return [list(row) for row in self.entries]

    def __str__(self) -> str:
        return '[' + ', '.join('[' + ', '.join(map(str, row)) + ']' for row in self.entries) + ']'


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _combine_columns(m: list[list[int]], j: int, k: int, a: int, b: int, c: int, d: int) -> None:
    # col j <- a*col j + b*col k, col k <- c*col j + d*col k
    for row in m:
        x, y = row[j], row[k]
        row[j] = a * x + b * y
        row[k] = c * x + d * y


def _combine_rows(m: list[list[int]], i: int, k: int, a: int, b: int, c: int, d: int) -> None:
    ri, rk = m[i], m[k]
    m[i] = [a * x + b * y for x, y in zip(ri, rk, strict=True)]
    m[k] = [c * x + d * y for x, y in zip(ri, rk, strict=True)]


def hermite_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Column-style HNF: returns (H, U) with H = m @ U and U unimodular.

    Pivot rows strictly increase from left to right, pivots are positive,
    entries left of a pivot are reduced into [0, pivot) and zero columns
    come last. The nonzero columns of H are a canonical basis of the column
    lattice of m.
    """
    h = m.to_lists()
    u = IntMatrix.identity(m.ncols).to_lists()
    piv = 0
    for i in range(m.nrows):
        if piv >= m.ncols:
            break
        for j in range(piv + 1, m.ncols):
            b = h[i][j]
            if b == 0:
                continue
            a = h[i][piv]
            g, s, t = xgcd(a, b)
            _combine_columns(h, piv, j, s, t, -b // g, a // g)
            _combine_columns(u, piv, j, s, t, -b // g, a // g)
        pivot = h[i][piv]
        if pivot == 0:
            continue
        if pivot < 0:
            _combine_columns(h, piv, piv, -1, 0, -1, 0)
            _combine_columns(u, piv, piv, -1, 0, -1, 0)
            pivot = -pivot
        for j in range(piv):
            q = h[i][j] // pivot
            if q:
                _combine_columns(h, j, piv, 1, -q, 0, 1)
                _combine_columns(u, j, piv, 1, -q, 0, 1)
        piv += 1
    return IntMatrix.from_rows(h, m.ncols), IntMatrix.from_rows(u, m.ncols)


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Returns (S, U, V) with U @ m @ V = S diagonal and d1 | d2 | ...

    Alternates column and row Hermite reductions until the matrix is
    diagonal, then repairs the divisibility chain pairwise with gcd/lcm
    moves. Diagonal entries are non-negative and zeros come last.
    """
    a = m
    u = IntMatrix.identity(m.nrows)
    v = IntMatrix.identity(m.ncols)
    while True:
        a, v1 = hermite_normal_form(a)
        v = v @ v1
        if a.is_diagonal():
            break
        at, w = hermite_normal_form(a.transpose())
        a = at.transpose()
        u = w.transpose() @ u
        if a.is_diagonal():
            break

    d = list(a.diagonal_entries())
    ul, vl = u.to_lists(), v.to_lists()
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            if d[j] == 0 or (d[i] != 0 and d[j] % d[i] == 0):
                continue
            x, y = d[i], d[j]
            g, s, t = xgcd(x, y)
            _combine_rows(ul, i, j, s, t, -y // g, x // g)
            _combine_columns(vl, i, j, 1, -t * y // g, 1, s * x // g)
            d[i], d[j] = g, x * y // g
    for i, value in enumerate(d):
        if value < 0:
            ul[i] = [-e for e in ul[i]]
            d[i] = -value
    s_matrix = IntMatrix.diagonal(d, m.nrows, m.ncols)
    return s_matrix, IntMatrix.from_rows(ul, m.nrows), IntMatrix.from_rows(vl, m.ncols)


def invariant_factors(m: IntMatrix) -> tuple[int, ...]:
    """Nonzero diagonal entries of the Smith form."""
    s, _, _ = smith_normal_form(m)
    return tuple(d for d in s.diagonal_entries() if d != 0)


# ----------------------------- Lattices ----------------------------- #


def _pivot_row(column: Sequence[int]) -> int | None:
    for i, value in enumerate(column):
        if value != 0:
            return i
    return None


def column_basis(m: IntMatrix) -> IntMatrix:
    """Canonical basis (HNF columns) of the lattice spanned by the columns of m."""
    h, _ = hermite_normal_form(m)
    keep = [j for j in range(h.ncols) if any(h.column(j))]
    return h.select_columns(keep)


def rank(m: IntMatrix) -> int:
    return column_basis(m).ncols


def integer_kernel(m: IntMatrix) -> IntMatrix:
    """Basis (as columns) of {v in Z^ncols : m v = 0}."""
    h, u = hermite_normal_form(m)
    keep = [j for j in range(h.ncols) if not any(h.column(j))]
    return column_basis(u.select_columns(keep))


def solve_integer(m: IntMatrix, v: Sequence[int]) -> tuple[int, ...] | None:
    """Some integer y with m @ y = v, or None when v is outside the lattice."""
    h, u = hermite_normal_form(m)
    residual = list(v)
    coeffs = [0] * m.ncols
    for k in range(h.ncols):
        col = h.column(k)
        r = _pivot_row(col)
        if r is None:
            break
        if residual[r] % col[r] != 0:
            return None
        c = residual[r] // col[r]
        coeffs[k] = c
        residual = [x - c * y for x, y in zip(residual, col, strict=True)]
    if any(residual):
        return None
    return u.apply(coeffs)


def in_lattice(m: IntMatrix, v: Sequence[int]) -> bool:
    return solve_integer(m, v) is not None


def lattice_contains(big: IntMatrix, small: IntMatrix) -> bool:
    return all(in_lattice(big, col) for col in small.columns())


def lattice_equal(a: IntMatrix, b: IntMatrix) -> bool:
    return column_basis(a) == column_basis(b)


def rational_solve(m: IntMatrix, v: Sequence[int]) -> tuple[Fraction, ...] | None:
    """Rational coordinates of v against the canonical basis of m's lattice."""
    basis = column_basis(m)
    residual = [Fraction(x) for x in v]
    coeffs = []
    for col in basis.columns():
        r = _pivot_row(col)
        c = residual[r] / col[r]
        coeffs.append(c)
        residual = [x - c * y for x, y in zip(residual, col, strict=True)]
    if any(residual):
        return None
    return tuple(coeffs)


def preimage(f: IntMatrix, lattice: IntMatrix) -> IntMatrix:
    """Basis of {v : f v lies in the column lattice of `lattice`}."""
    if lattice.nrows != f.nrows:
        raise ValueError('preimage lattice lives in the wrong ambient space')
    kernel = integer_kernel(f.hstack(lattice))
    return column_basis(kernel.select_rows(range(f.ncols)))


def kernel_mod(m: IntMatrix, modulus: int) -> IntMatrix:
    """Basis of {v : m v = 0 mod modulus}; modulus 0 means the exact kernel."""
    return preimage(m, IntMatrix.identity(m.nrows).scale(modulus))


def unimodular_inverse(u: IntMatrix) -> IntMatrix:
    h, w = hermite_normal_form(u)
    if h != IntMatrix.identity(u.nrows):
        raise ValueError('matrix is not unimodular')
    return w
