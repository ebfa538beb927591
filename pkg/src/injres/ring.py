"""The dual-number rings A[x]/(x^2) and their ideals.

An element a + bx is stored as the pair (a, b). Over the integers every ideal
is a lattice in the (a, b)-plane closed under (a, b) -> (0, a), which is what
makes membership, annihilators and containment decidable with normal forms.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from math import lcm

from sympy import isprime, primerange

from injres.errors import (
    BaseRingMismatchError,
    InjresError,
    UnsupportedDifferentialError,
)
from injres.exactnum import (
    IntMatrix,
    column_basis,
    in_lattice,
    integer_kernel,
    rational_solve,
)

log = logging.getLogger(__name__)


class BaseKind(StrEnum):
    INTEGERS = 'Z'
    RATIONALS = 'Q'
    LOCALIZED = 'Z_(p)'
    FINITE_FIELD = 'F_p'


@dataclass(frozen=True)
class BaseRing:
    kind: BaseKind
    p: int | None = None

    def __post_init__(self):
        needs_prime = self.kind in (BaseKind.LOCALIZED, BaseKind.FINITE_FIELD)
        if needs_prime and (self.p is None or not isprime(self.p)):
            raise ValueError(f'{self.kind} needs a prime, got {self.p}')
        if not needs_prime and self.p is not None:
            raise ValueError(f'{self.kind} takes no prime')

    @classmethod
    def integers(cls) -> BaseRing:
        return cls(BaseKind.INTEGERS)

    @classmethod
    def rationals(cls) -> BaseRing:
        return cls(BaseKind.RATIONALS)

    @classmethod
    def localized_at(cls, p: int) -> BaseRing:
        return cls(BaseKind.LOCALIZED, p)

    @classmethod
    def finite_field(cls, p: int) -> BaseRing:
        return cls(BaseKind.FINITE_FIELD, p)

    def normalize(self, value: int | Fraction) -> Fraction:
        value = Fraction(value)
        match self.kind:
            case BaseKind.INTEGERS:
                if value.denominator != 1:
                    raise ValueError(f'{value} is not an integer')
            case BaseKind.LOCALIZED:
                if value.denominator % self.p == 0:
                    raise ValueError(f'{value} is not in Z localized at {self.p}')
            case BaseKind.FINITE_FIELD:
                if value.denominator % self.p == 0:
                    raise ValueError(f'{value} has no image in F_{self.p}')
                inverse = pow(value.denominator, -1, self.p)
                value = Fraction(value.numerator * inverse % self.p)
        return value

    def is_unit(self, value: int | Fraction) -> bool:
        value = Fraction(value)
        match self.kind:
            case BaseKind.INTEGERS:
                return value in (1, -1)
            case BaseKind.LOCALIZED:
                return value.numerator % self.p != 0
            case BaseKind.FINITE_FIELD:
                return value.numerator % self.p != 0
        return value != 0

    def __str__(self) -> str:
        match self.kind:
            case BaseKind.LOCALIZED:
                return f'Z_({self.p})'
            case BaseKind.FINITE_FIELD:
                return f'F_{self.p}'
        return str(self.kind)


ZZ = BaseRing.integers()
QQ = BaseRing.rationals()


@dataclass(frozen=True)
class RingElt:
    """a + bx with x^2 = 0."""

    a: Fraction
    b: Fraction = Fraction(0)
    base: BaseRing = ZZ

    def __post_init__(self):
        object.__setattr__(self, 'a', self.base.normalize(self.a))
        object.__setattr__(self, 'b', self.base.normalize(self.b))

    @classmethod
    def x(cls, base: BaseRing = ZZ) -> RingElt:
        return cls(0, 1, base)

    @classmethod
    def one(cls, base: BaseRing = ZZ) -> RingElt:
        return cls(1, 0, base)

    @property
    def coords(self) -> tuple[int, int]:
        """Integral coordinates after clearing denominators by a unit of the base."""
        den = lcm(self.a.denominator, self.b.denominator)
        return int(self.a * den), int(self.b * den)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.base.is_unit(self.a)

    def _check(self, other: RingElt) -> None:
        if self.base != other.base:
            raise BaseRingMismatchError(f'{self.base} and {other.base} differ')

    def __add__(self, other: RingElt) -> RingElt:
        self._check(other)
        return RingElt(self.a + other.a, self.b + other.b, self.base)

    def __neg__(self) -> RingElt:
        return RingElt(-self.a, -self.b, self.base)

    def __sub__(self, other: RingElt) -> RingElt:
        return self + (-other)

    def __mul__(self, other: RingElt) -> RingElt:
        return ring_mul(self, other)

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f'{self.b}x'
        return f'{self.a}+{self.b}x'


def ring_mul(r: RingElt, s: RingElt) -> RingElt:
    r._check(s)
    return RingElt(r.a * s.a, r.a * s.b + r.b * s.a, r.base)


def multiplication_matrix(r: RingElt) -> IntMatrix:
    """Matrix of s -> r*s on (c, d) coordinates."""
    a, b = r.coords
    return IntMatrix.from_rows([[a, 0], [b, a]])


X_MATRIX = IntMatrix.from_rows([[0, 0], [1, 0]])


@dataclass(frozen=True, eq=False)
class Ideal:
    generators: tuple[RingElt, ...]
    base: BaseRing = ZZ
    lattice: IntMatrix = field(init=False, repr=False)

    def __post_init__(self):
        for g in self.generators:
            if g.base != self.base:
                raise BaseRingMismatchError(f'generator {g} is not over {self.base}')
        columns = []
        for g in self.generators:
            a, b = g.coords
            columns += [(a, b), (0, a)]
        span = IntMatrix.from_columns(columns, 2)
        if self.base.kind is BaseKind.FINITE_FIELD:
            span = span.hstack(IntMatrix.identity(2).scale(self.base.p))
        object.__setattr__(self, 'lattice', column_basis(span))

    @classmethod
    def generated(cls, *generators: RingElt, base: BaseRing = ZZ) -> Ideal:
        if generators:
            base = generators[0].base
        return cls(tuple(generators), base)

    @classmethod
    def from_lattice(cls, lattice: IntMatrix, base: BaseRing = ZZ) -> Ideal:
        return cls(tuple(RingElt(a, b, base) for a, b in lattice.columns()), base)

    @classmethod
    def zero(cls, base: BaseRing = ZZ) -> Ideal:
        return cls((), base)

    @classmethod
    def unit(cls, base: BaseRing = ZZ) -> Ideal:
        return cls((RingElt.one(base),), base)

    def contains(self, r: RingElt) -> bool:
        return ideal_membership(r, self)

    def __contains__(self, r: RingElt) -> bool:
        return ideal_membership(r, self)

    def issubset(self, other: Ideal) -> bool:
        return all(other.contains(g) for g in self.generators)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ideal):
            return NotImplemented
        return self.base == other.base and self.issubset(other) and other.issubset(self)

    def __hash__(self) -> int:
        return hash(self.base)

    def __add__(self, other: Ideal) -> Ideal:
        return Ideal(self.generators + other.generators, self.base)

    def __mul__(self, other: Ideal) -> Ideal:
        products = tuple(g * h for g in self.generators for h in other.generators)
        return Ideal(products, self.base)

    def power(self, k: int) -> Ideal:
        result = Ideal.unit(self.base)
        for _ in range(k):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.generators) or (
            self.base.kind is BaseKind.FINITE_FIELD
            and all(g.a % self.base.p == 0 and g.b % self.base.p == 0 for g in self.generators)
        )

    def is_unit_ideal(self) -> bool:
        return self.contains(RingElt.one(self.base))

    def __str__(self) -> str:
        if self.is_zero():
            return '(0)'
        return '(' + ', '.join(str(g) for g in self.generators) + ')'


def ideal_membership(r: RingElt, ideal: Ideal) -> bool:
    if r.base != ideal.base:
        raise BaseRingMismatchError(f'{r} is over {r.base}, ideal over {ideal.base}')
    match ideal.base.kind:
        case BaseKind.INTEGERS | BaseKind.FINITE_FIELD:
            return in_lattice(ideal.lattice, (int(r.a), int(r.b)))
        case BaseKind.RATIONALS:
            return rational_solve(ideal.lattice, (r.a, r.b)) is not None
        case BaseKind.LOCALIZED:
            coeffs = rational_solve(ideal.lattice, (r.a, r.b))
            return coeffs is not None and all(c.denominator % ideal.base.p for c in coeffs)
    raise InjresError(f'unknown base ring {ideal.base}')


def annihilator_of_element(r: RingElt) -> Ideal:
    if r.base.kind not in (BaseKind.INTEGERS, BaseKind.LOCALIZED):
        raise BaseRingMismatchError(f'annihilators are computed over Z or Z_(p), not {r.base}')
    kernel = integer_kernel(multiplication_matrix(r))
    return Ideal.from_lattice(kernel, r.base)


class PrimeKind(StrEnum):
    MINIMAL = 'minimal'
    MAXIMAL = 'maximal'


@dataclass(frozen=True)
class PrimeIdeal:
    """(x) or (q, x) in Z[x]/(x^2); every prime has one of these shapes."""

    kind: PrimeKind
    q: int | None = None

    def __post_init__(self):
        if self.kind is PrimeKind.MAXIMAL and (self.q is None or not isprime(self.q)):
            raise ValueError(f'(q, x) needs a rational prime q, got {self.q}')
        if self.kind is PrimeKind.MINIMAL and self.q is not None:
            raise ValueError('(x) carries no rational prime')

    @classmethod
    def minimal_x(cls) -> PrimeIdeal:
        return cls(PrimeKind.MINIMAL)

    @classmethod
    def maximal_at(cls, q: int) -> PrimeIdeal:
        return cls(PrimeKind.MAXIMAL, q)

    @property
    def is_maximal(self) -> bool:
        return self.kind is PrimeKind.MAXIMAL

    @property
    def ideal(self) -> Ideal:
        if self.is_maximal:
            return Ideal.generated(RingElt(self.q), RingElt.x())
        return Ideal.generated(RingElt.x())

    @property
    def sort_key(self) -> tuple[int, int]:
        return (1, self.q) if self.is_maximal else (0, 0)

    def contains(self, r: RingElt) -> bool:
        """Membership of an integral element."""
        a, _ = r.coords
        if self.is_maximal:
            return a % self.q == 0
        return a == 0

    def contained_in(self, other: PrimeIdeal) -> bool:
        if not self.is_maximal:
            return True
        return other.is_maximal and other.q == self.q

    def __str__(self) -> str:
        return f'({self.q},x)' if self.is_maximal else '(x)'


def _certify_prime(prime: PrimeIdeal, sample_bound: int = 3) -> bool:
    ideal = prime.ideal
    if not ideal.contains(RingElt.x()) or ideal.is_unit_ideal():
        return False
    values = range(-sample_bound, sample_bound + 1)
    elements = [RingElt(a, b) for a, b in itertools.product(values, repeat=2)]
    for r, s in itertools.product(elements, repeat=2):
        if ideal.contains(r * s) and not (ideal.contains(r) or ideal.contains(s)):
            log.debug('%s fails the domain check at %s * %s', prime, r, s)
            return False
    return True


def spec_enumerate(bound: int) -> list[PrimeIdeal]:
    primes = [PrimeIdeal.minimal_x()]
    primes += [PrimeIdeal.maximal_at(int(q)) for q in primerange(2, bound + 1)]
    for prime in primes:
        if not _certify_prime(prime):
            raise InjresError(f'{prime} failed the prime certification pass')
    log.debug('Spec up to %d: %s', bound, ', '.join(map(str, primes)))
    return primes


def residue_field(prime: PrimeIdeal) -> BaseRing:
    if prime.is_maximal:
        return BaseRing.finite_field(prime.q)
    return QQ


@dataclass(frozen=True)
class Localization:
    """R localized at a prime: (x) gives Q[x]/(x^2), (q,x) gives Z_(q)[x]/(x^2)."""

    prime: PrimeIdeal

    @property
    def base(self) -> BaseRing:
        if self.prime.is_maximal:
            return BaseRing.localized_at(self.prime.q)
        return QQ

    def image(self, r: RingElt) -> RingElt:
        return RingElt(r.a, r.b, self.base)

    def is_unit(self, r: RingElt) -> bool:
        return not self.prime.contains(r)

    def is_zero_divisor(self, r: RingElt) -> bool:
        return r.a == 0


def localize_ring(prime: PrimeIdeal) -> Localization:
    return Localization(prime)


@dataclass(frozen=True)
class RMatrix:
    """Matrix over Z[x]/(x^2); acts on column vectors of R-coordinates."""

    nrows: int
    ncols: int
    entries: tuple[tuple[RingElt, ...], ...]

    @classmethod
    def from_rows(cls, rows, ncols: int | None = None) -> RMatrix:
        """Rows of RingElt, integers, or (a, b) pairs."""
        try:
            rows = tuple(tuple(_as_ring_elt(v) for v in row) for row in rows)
        except ValueError as e:
            raise UnsupportedDifferentialError(f'entry outside Z[x]/(x^2): {e}') from e
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(row) != ncols for row in rows):
            raise ValueError('ragged R-matrix')
        return cls(len(rows), ncols, rows)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> RMatrix:
        return cls.from_rows([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n: int) -> RMatrix:
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij: tuple[int, int]) -> RingElt:
        i, j = ij
        return self.entries[i][j]

    def transpose(self) -> RMatrix:
        return RMatrix.from_rows(
            [[self.entries[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
            self.nrows,
        )

    def __matmul__(self, other: RMatrix) -> RMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f'shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}')
        rows = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                total = RingElt(0)
                for k in range(self.ncols):
                    total = total + self.entries[i][k] * other.entries[k][j]
                row.append(total)
            rows.append(row)
        return RMatrix.from_rows(rows, other.ncols)

    def __add__(self, other: RMatrix) -> RMatrix:
        rows = [
            [a + b for a, b in zip(r, s, strict=True)]
            for r, s in zip(self.entries, other.entries, strict=True)
        ]
        return RMatrix.from_rows(rows, self.ncols)

    def scale(self, r: RingElt) -> RMatrix:
        return RMatrix.from_rows([[r * v for v in row] for row in self.entries], self.ncols)

    def is_zero(self) -> bool:
        return all(v.is_zero() for row in self.entries for v in row)

    def expand(self, x_action: IntMatrix = X_MATRIX) -> IntMatrix:
        """Integer matrix with blocks a*I + b*X, for a module whose x-action is X."""
        k = x_action.nrows
        rows = [[0] * (self.ncols * k) for _ in range(self.nrows * k)]
        for i, row in enumerate(self.entries):
            for j, entry in enumerate(row):
                a, b = int(entry.a), int(entry.b)
                for s in range(k):
                    for t in range(k):
                        rows[i * k + s][j * k + t] = a * (s == t) + b * x_action[s, t]
        return IntMatrix.from_rows(rows, self.ncols * k)

    def a_part(self) -> IntMatrix:
        return IntMatrix.from_rows(
            [[int(v.a) for v in row] for row in self.entries], self.ncols
        )

    def __str__(self) -> str:
        return '[' + '; '.join(' '.join(str(v) for v in row) for row in self.entries) + ']'


def _as_ring_elt(value) -> RingElt:
    if isinstance(value, RingElt):
        return value
    if isinstance(value, tuple):
        return RingElt(*value)
    return RingElt(value)
