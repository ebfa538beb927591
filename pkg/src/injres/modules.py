"""Standard injective modules, the Prüfer-type module M and artinian duals.

EMax(p) is modelled as pairs (f0, f1) of Prüfer elements with
x.(f0, f1) = (f1, 0); this is Hom_Z(R, Z(p^inf)) evaluated at (1, x).
EMin is Q[x]/(x^2) itself with x.(a, b) = (0, a). M is Z(p^inf) with x = 0.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from funlog import log_calls

from injres.config import ENUMERATION_LIMIT
from injres.errors import PrimeMismatchError, ShapeError
from injres.exactnum import (
    IntMatrix,
    PruferElt,
    kernel_mod,
    lattice_equal,
    p_valuation,
    prufer_scale,
    rational_solve,
)
from injres.presented import (
    FgModule,
    block_diagonal,
    fp_homology,
    subquotient,
)
from injres.ring import X_MATRIX, Ideal, PrimeIdeal, RingElt, RMatrix

log = logging.getLogger(__name__)


def _frac_scale(value: Fraction, f: PruferElt) -> PruferElt:
    """Multiply by a rational whose denominator is prime to p."""
    value = Fraction(value)
    if f.is_zero():
        return f
    inverse = pow(value.denominator, -1, f.order)
    return prufer_scale(value.numerator * inverse, f)


def prufer_annihilator(f: PruferElt) -> Ideal:
    """ann of an element of M: (p^expo, x)."""
    return Ideal.generated(RingElt(f.order), RingElt.x())


@dataclass(frozen=True)
class EElt:
    f0: PruferElt
    f1: PruferElt

    def __post_init__(self):
        if self.f0.p != self.f1.p:
            raise PrimeMismatchError(f'components over {self.f0.p} and {self.f1.p}')

    @classmethod
    def of(cls, p: int, f0: Fraction | int = 0, f1: Fraction | int = 0) -> EElt:
        return cls(
            PruferElt.from_fraction(p, Fraction(f0)),
            PruferElt.from_fraction(p, Fraction(f1)),
        )

    @classmethod
    def zero(cls, p: int) -> EElt:
        return cls(PruferElt(p), PruferElt(p))

    @property
    def p(self) -> int:
        return self.f0.p

    @property
    def order(self) -> int:
        return max(self.f0.order, self.f1.order)

    def is_zero(self) -> bool:
        return self.f0.is_zero() and self.f1.is_zero()

    def x_act(self) -> EElt:
        return EElt(self.f1, PruferElt(self.p))

    def scalar_act(self, r: RingElt) -> EElt:
        return EElt(
            _frac_scale(r.a, self.f0) + _frac_scale(r.b, self.f1),
            _frac_scale(r.a, self.f1),
        )

    def __add__(self, other: EElt) -> EElt:
        return EElt(self.f0 + other.f0, self.f1 + other.f1)

    def __neg__(self) -> EElt:
        return EElt(-self.f0, -self.f1)

    def __sub__(self, other: EElt) -> EElt:
        return self + (-other)

    def __rmul__(self, n: int) -> EElt:
        return EElt(n * self.f0, n * self.f1)

    def annihilator(self) -> Ideal:
        # c.e + d.x.e = (c f0 + d f1, c f1)
        k = max(self.f0.expo, self.f1.expo)
        modulus = self.p**k
        u0 = self.f0.num * self.p ** (k - self.f0.expo)
        u1 = self.f1.num * self.p ** (k - self.f1.expo)
        lattice = kernel_mod(IntMatrix.from_rows([[u0, u1], [u1, 0]]), modulus)
        return Ideal.from_lattice(lattice)

    def nilpotency_index(self) -> int:
        """Least k with (p, x)^k e = 0."""
        if self.f1.is_zero():
            return self.f0.expo
        return max(self.f0.expo, self.f1.expo + 1)

    def __str__(self) -> str:
        return f'({self.f0}, {self.f1})'


@dataclass(frozen=True)
class EMinElt:
    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'a', Fraction(self.a))
        object.__setattr__(self, 'b', Fraction(self.b))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def x_act(self) -> EMinElt:
        return EMinElt(0, self.a)

    def scalar_act(self, r: RingElt) -> EMinElt:
        return EMinElt(r.a * self.a, r.a * self.b + r.b * self.a)

    def __add__(self, other: EMinElt) -> EMinElt:
        return EMinElt(self.a + other.a, self.b + other.b)

    def __neg__(self) -> EMinElt:
        return EMinElt(-self.a, -self.b)

    def annihilator(self) -> Ideal:
        if self.is_zero():
            return Ideal.unit()
        if self.a == 0:
            return Ideal.generated(RingElt.x())
        return Ideal.zero()

    def __str__(self) -> str:
        return f'({self.a}, {self.b})'


def x_act(e):
    if isinstance(e, PruferElt):
        return PruferElt(e.p)
    return e.x_act()


def scalar_act(r: RingElt, e):
    if isinstance(e, PruferElt):
        return _frac_scale(r.a, e)
    return e.scalar_act(r)


def ann_element(e) -> Ideal:
    """Exact annihilator of an element of any species."""
    if isinstance(e, PruferElt):
        return prufer_annihilator(e)
    return e.annihilator()


# ----------------------------- Descriptors ----------------------------- #


@dataclass(frozen=True)
class ZeroModule:
    def is_zero(self) -> bool:
        return True

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        return True

    def describe(self) -> str:
        return '0'

    def __str__(self) -> str:
        return '0'


@dataclass(frozen=True)
class StdInjective:
    """E(R/P) for P = (p, x) or P = (x)."""

    at: PrimeIdeal

    @classmethod
    def emax(cls, p: int) -> StdInjective:
        return cls(PrimeIdeal.maximal_at(p))

    @classmethod
    def emin(cls) -> StdInjective:
        return cls(PrimeIdeal.minimal_x())

    @property
    def is_max(self) -> bool:
        return self.at.is_maximal

    @property
    def p(self) -> int | None:
        return self.at.q

    def is_zero(self) -> bool:
        return False

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        return not self.at.contained_in(prime)

    def zero_element(self) -> EElt | EMinElt:
        return EElt.zero(self.p) if self.is_max else EMinElt(0)

    def socle_generator(self) -> EElt | EMinElt:
        return EElt.of(self.p, Fraction(1, self.p)) if self.is_max else EMinElt(0, 1)

    def elements(self, k: int) -> Iterator[EElt]:
        """Elements of EMax(p) with both coordinates of order dividing p^k."""
        p = self.p
        for u0 in range(p**k):
            for u1 in range(p**k):
                yield EElt(PruferElt(p, u0, k), PruferElt(p, u1, k))

    def random_element(self, rng: random.Random, max_expo: int) -> EElt | EMinElt:
        if not self.is_max:
            return EMinElt(
                Fraction(rng.randint(-9, 9), rng.randint(1, 9)),
                Fraction(rng.randint(-9, 9), rng.randint(1, 9)),
            )
        p = self.p
        k0, k1 = rng.randint(0, max_expo), rng.randint(0, max_expo)
        return EElt(
            PruferElt(p, rng.randrange(p**k0), k0),
            PruferElt(p, rng.randrange(p**k1), k1),
        )

    def associated_primes(self) -> set[PrimeIdeal]:
        return {self.at}

    def describe(self) -> str:
        return f'E(R/{self.at})'

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class MModule:
    """Z(p^inf) with x acting as zero."""

    p: int

    def is_zero(self) -> bool:
        return False

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        return not (prime.is_maximal and prime.q == self.p)

    def random_element(self, rng: random.Random, max_expo: int) -> PruferElt:
        k = rng.randint(0, max_expo)
        return PruferElt(self.p, rng.randrange(self.p**k), k)

    def associated_primes(self) -> set[PrimeIdeal]:
        return {PrimeIdeal.maximal_at(self.p)}

    def describe(self) -> str:
        return f'M({self.p})'

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class RationalModule:
    """Q^dim; x acts as zero unless the module came from an EMin computation."""

    dim: int

    def is_zero(self) -> bool:
        return self.dim == 0

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        return self.dim == 0

    def describe(self) -> str:
        return f'Q^{self.dim}' if self.dim else '0'

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class ArtinianModule:
    """Hom_Z(dual, Z(p^inf)) with x acting by precomposition."""

    p: int
    dual: FgModule

    @property
    def local_torsion(self) -> tuple[int, ...]:
        orders = [d for d in self.dual.torsion_orders if d % self.p == 0]
        return tuple(self.p ** p_valuation(d, self.p) for d in orders)

    def is_zero(self) -> bool:
        return self.dual.free_rank == 0 and not self.local_torsion

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        return self.is_zero() or not (prime.is_maximal and prime.q == self.p)

    def _x_vanishes_locally(self) -> bool:
        relations = self.dual.relations
        for col in self.dual.x_action.columns():
            if not any(col):
                continue
            coeffs = rational_solve(relations, col)
            if coeffs is None or any(c.denominator % self.p == 0 for c in coeffs):
                return False
        return True

    def _free_rank_locally(self) -> int | None:
        dual = self.dual
        f = dual.free_rank
        if self.local_torsion or f % 2:
            return None
        image = dual.relations.hstack(dual.x_action)
        quotient = subquotient(dual.x_kernel, image, dual.x_action)
        if quotient.free_rank or any(d % self.p == 0 for d in quotient.torsion_orders):
            return None
        return f // 2

    def structure(self) -> tuple[int, int, tuple[int, ...]] | None:
        """(r, f, orders) meaning E^r + M^f + sum of Z/order, if recognisable."""
        if self.is_zero():
            return 0, 0, ()
        if self._x_vanishes_locally():
            return 0, self.dual.free_rank, self.local_torsion
        r = self._free_rank_locally()
        if r is not None:
            return r, 0, ()
        return None

    def simplify(self):
        match self.structure():
            case (0, 0, ()):
                return ZeroModule()
            case (1, 0, ()):
                return StdInjective.emax(self.p)
            case (0, 1, ()):
                return MModule(self.p)
        return self

    def describe(self) -> str:
        structure = self.structure()
        if structure is None:
            return f'Hom({self.dual}, Z({self.p}^inf))'
        r, f, orders = structure
        parts = []
        if r:
            parts.append(f'E(R/({self.p},x))' + (f'^{r}' if r > 1 else ''))
        if f:
            parts.append(f'M({self.p})' + (f'^{f}' if f > 1 else ''))
        parts += [f'Z/{d}' for d in orders]
        return ' + '.join(parts) or '0'

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class LocalizedModule:
    inner: object
    at: PrimeIdeal

    def is_zero(self) -> bool:
        return self.inner.vanishes_at(self.at)

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        return self.is_zero() or not prime.contained_in(self.at)

    def describe(self) -> str:
        return '0' if self.is_zero() else f'({self.inner.describe()})_{self.at}'

    def __str__(self) -> str:
        return self.describe()


def describe(module) -> str:
    return module.describe()


def same_descriptor(a, b) -> bool:
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    return describe(simplify(a)) == describe(simplify(b))


def simplify(module):
    if isinstance(module, ArtinianModule):
        return module.simplify()
    if module.is_zero():
        return ZeroModule()
    return module


# ------------------------------ Operations ------------------------------ #


@dataclass(frozen=True)
class Socle:
    """Hom(k(P), module_P), as a dimension with explicit generators when known."""

    prime: PrimeIdeal
    dimension: int
    generators: tuple = ()

    def is_zero(self) -> bool:
        return self.dimension == 0

    @property
    def size(self) -> int | None:
        return self.prime.q**self.dimension if self.prime.is_maximal else None


def socle(module, prime: PrimeIdeal) -> Socle:
    match module:
        case StdInjective() if module.at == prime:
            return Socle(prime, 1, (module.socle_generator(),))
        case MModule(p=p) if prime.is_maximal and prime.q == p:
            return Socle(prime, 1, (PruferElt(p, 1, 1),))
        case FgModule():
            return Socle(prime, module.socle_dimension(prime))
    return Socle(prime, 0)


def big_support(module, primes: Sequence[PrimeIdeal]) -> list[PrimeIdeal]:
    return [prime for prime in primes if not module.vanishes_at(prime)]


@dataclass(frozen=True)
class Finite:
    length: int


@dataclass(frozen=True)
class Infinite:
    chain: tuple[EElt, ...]
    orders: tuple[int, ...]


def length_over_localization(module: StdInjective) -> Finite | Infinite:
    if not module.is_max:
        # 0 < (x) < Q[x]/(x^2)
        return Finite(2)
    p = module.p
    chain = tuple(EElt.of(p, Fraction(1, p**k)) for k in (1, 2, 3))
    for smaller, larger in zip(chain, chain[1:], strict=False):
        if p * larger != smaller:
            raise AssertionError(f'{smaller} is not in the span of {larger}')
    return Infinite(chain, tuple(e.order for e in chain))


def unit_action_method(module, k: int) -> str:
    """How unit_action_is_bijective decides at order p^k: formula, enumeration or lattice."""
    if not (isinstance(module, StdInjective) and module.is_max):
        return 'formula'
    if module.p ** (2 * k) <= ENUMERATION_LIMIT:
        return 'enumeration'
    return 'lattice'


@lru_cache(maxsize=256)
def unit_action_is_bijective(module, s: RingElt, k: int) -> bool:
    """Is s a bijection on the elements of order dividing p^k (EMax, M) or on all of EMin?"""
    if isinstance(module, StdInjective) and not module.is_max:
        return s.a != 0
    p = module.p
    a, b = s.coords
    if isinstance(module, MModule):
        return a % p != 0
    if unit_action_method(module, k) == 'enumeration':
        images = {e.scalar_act(s) for e in module.elements(k)}
        return len(images) == p ** (2 * k)
    matrix = IntMatrix.from_rows([[a, b], [0, a]])
    return lattice_equal(kernel_mod(matrix, p**k), IntMatrix.identity(2).scale(p**k))


@log_calls(level='debug', show_timing_only=True)
def matlis_dual_homology(
    species,
    ranks: Mapping[int, int],
    differentials: Mapping[int, RMatrix],
    degree: int,
):
    """Cohomology at `degree` of a finite complex of powers of one injective.

    `differentials[n]` maps term n to term n+1. The complex is the dual of a
    complex of free modules with transposed matrices; its homology is
    computed there and dualised back.
    """
    rank_at = lambda n: ranks.get(n, 0)
    n = rank_at(degree)
    if n == 0:
        return ZeroModule()
    if isinstance(species, MModule):
        width, x_block, expand = 1, IntMatrix.zeros(1, 1), lambda m: m.transpose().a_part()
    else:
        width, x_block, expand = 2, X_MATRIX, lambda m: m.transpose().expand()

    def _dual(source: int) -> IntMatrix | None:
        d = differentials.get(source)
        if d is None or rank_at(source) == 0 or rank_at(source + 1) == 0:
            return None
        if (d.nrows, d.ncols) != (rank_at(source + 1), rank_at(source)):
            raise ShapeError(f'differential from degree {source} has the wrong shape')
        return expand(d)

    x_action = block_diagonal(*[x_block] * n)
    outgoing = _dual(degree - 1)
    homology = fp_homology(
        incoming=_dual(degree),
        outgoing=outgoing,
        relations=IntMatrix.zeros(width * n, 0),
        relations_out=IntMatrix.zeros(outgoing.nrows, 0) if outgoing is not None else None,
        x_action=x_action,
    )
    log.debug('Dual homology in degree %d: %s', degree, homology)
    if isinstance(species, StdInjective) and not species.is_max:
        return RationalModule(homology.free_rank)
    p = species.p
    return ArtinianModule(p, homology).simplify()


