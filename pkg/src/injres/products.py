"""Countable products of EMax(p) or M with formulaic elements.

An element of prod_{i >= start} E is a finite set of exceptional slots plus a
tail given by finitely many geometric terms. The family is closed under
addition, the ring action and the x-shift, and in it annihilators, torsion
and vanishing are decided exactly.
"""

from __future__ import annotations

import logging
import random
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction

from injres.errors import IncompatibleShapesError
from injres.exactnum import IntMatrix, PruferElt, kernel_mod, p_valuation
from injres.modules import (
    ArtinianModule,
    EElt,
    MModule,
    StdInjective,
    ZeroModule,
    ann_element,
)
from injres.presented import FgModule, direct_sum
from injres.ring import Ideal, PrimeIdeal, RingElt

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class TailTerm:
    """coeff * (-1)^(i if alternating) / p^(rate*i + offset), for slot i."""

    rate: int
    alternating: bool
    offset: int
    coeff: int

    def value(self, p: int, i: int) -> PruferElt:
        expo = self.rate * i + self.offset
        if expo <= 0:
            return PruferElt(p)
        sign = -1 if self.alternating and i % 2 else 1
        return PruferElt(p, sign * self.coeff, expo)


def _canonical_terms(p: int, terms: Sequence[TailTerm]) -> tuple[TailTerm, ...]:
    groups: dict[tuple[int, bool], list[TailTerm]] = defaultdict(list)
    for term in terms:
        if term.rate not in (0, 1):
            raise ValueError(f'tail rate must be 0 or 1, got {term.rate}')
        groups[term.rate, term.alternating].append(term)
    result = []
    for (rate, alternating), group in groups.items():
        offset = max(t.offset for t in group)
        coeff = sum(t.coeff * p ** (offset - t.offset) for t in group)
        if rate == 0:
            if offset <= 0:
                continue
            coeff %= p**offset
        while coeff and coeff % p == 0:
            coeff //= p
            offset -= 1
        if coeff == 0 or (rate == 0 and offset <= 0):
            continue
        result.append(TailTerm(rate, alternating, offset, coeff))
    return tuple(sorted(result))


@dataclass(frozen=True)
class GeoTail:
    p: int
    components: tuple[tuple[TailTerm, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            'components',
            tuple(_canonical_terms(self.p, terms) for terms in self.components),
        )

    @classmethod
    def zero(cls, p: int, ncomp: int) -> GeoTail:
        return cls(p, ((),) * ncomp)

    @classmethod
    def constant(cls, p: int, values: Sequence[Fraction]) -> GeoTail:
        components = []
        for value in values:
            value = Fraction(value)
            f = PruferElt.from_fraction(p, value)
            components.append((TailTerm(0, False, f.expo, f.num),) if f.num else ())
        return cls(p, tuple(components))

    @classmethod
    def geometric(
        cls, p: int, ncomp: int, component: int = 0, coeff: int = 1, offset: int = 1
    ) -> GeoTail:
        """coeff / p^(i + offset) in one component."""
        components = [()] * ncomp
        components[component] = (TailTerm(1, False, offset, coeff),)
        return cls(p, tuple(components))

    @property
    def ncomp(self) -> int:
        return len(self.components)

    def entry(self, i: int) -> tuple[PruferElt, ...]:
        values = []
        for terms in self.components:
            total = PruferElt(self.p)
            for term in terms:
                total = total + term.value(self.p, i)
            values.append(total)
        return tuple(values)

    def _combine(self, other: GeoTail) -> GeoTail:
        if (self.p, self.ncomp) != (other.p, other.ncomp):
            raise IncompatibleShapesError('tails over different factors')
        return GeoTail(
            self.p,
            tuple(a + b for a, b in zip(self.components, other.components, strict=True)),
        )

    def __add__(self, other: GeoTail) -> GeoTail:
        return self._combine(other)

    def scale(self, n: int) -> GeoTail:
        return GeoTail(
            self.p,
            tuple(
                tuple(TailTerm(t.rate, t.alternating, t.offset, n * t.coeff) for t in terms)
                for terms in self.components
            ),
        )

    def __neg__(self) -> GeoTail:
        return self.scale(-1)

    def alternate(self) -> GeoTail:
        """Multiply slot i by (-1)^i."""
        return GeoTail(
            self.p,
            tuple(
                tuple(TailTerm(t.rate, not t.alternating, t.offset, t.coeff) for t in terms)
                for terms in self.components
            ),
        )

    def reindex(self, s: int) -> GeoTail:
        """The tail whose slot i holds this tail's slot i + s."""
        return GeoTail(
            self.p,
            tuple(
                tuple(
                    TailTerm(
                        t.rate,
                        t.alternating,
                        t.offset + t.rate * s,
                        -t.coeff if t.alternating and s % 2 else t.coeff,
                    )
                    for t in terms
                )
                for terms in self.components
            ),
        )

    def x_act(self) -> GeoTail:
        if self.ncomp == 1:
            return GeoTail.zero(self.p, 1)
        return GeoTail(self.p, (self.components[1], ()))

    def component_unbounded(self, c: int) -> bool:
        return any(t.rate == 1 for t in self.components[c])

    def is_unbounded(self) -> bool:
        return any(self.component_unbounded(c) for c in range(self.ncomp))

    def component_is_zero(self, c: int) -> bool:
        if self.component_unbounded(c):
            return False
        return all(self.entry(i)[c].is_zero() for i in (0, 1))

    def is_zero(self) -> bool:
        return all(self.component_is_zero(c) for c in range(self.ncomp))

    def __str__(self) -> str:
        def term(t: TailTerm) -> str:
            sign = '(-1)^i*' if t.alternating else ''
            power = f'p^(i+{t.offset})' if t.rate else f'p^{t.offset}'
            return f'{sign}{t.coeff}/{power}'

        return '(' + ', '.join(' + '.join(map(term, c)) or '0' for c in self.components) + ')'


def _ncomp(factor) -> int:
    return 2 if isinstance(factor, StdInjective) else 1


def _check_factor(factor) -> None:
    if isinstance(factor, StdInjective) and factor.is_max:
        return
    if isinstance(factor, MModule):
        return
    raise IncompatibleShapesError(f'products are built over EMax(p) or M, not {factor}')


def _pack(factor, values: tuple[PruferElt, ...]):
    return EElt(*values) if _ncomp(factor) == 2 else values[0]


def _unpack(value) -> tuple[PruferElt, ...]:
    return (value.f0, value.f1) if isinstance(value, EElt) else (value,)


def _zero_value(factor):
    return EElt.zero(factor.p) if _ncomp(factor) == 2 else PruferElt(factor.p)


def _is_zero_value(value) -> bool:
    return value.is_zero()


@dataclass(frozen=True)
class SeqElt:
    """Element of prod_{i >= start} factor.

    Slot i holds exceptions[i] if present, else tail.entry(i) for
    i >= tail_start, else zero.
    """

    factor: StdInjective | MModule
    start: int
    exceptions: tuple[tuple[int, object], ...] = ()
    tail: GeoTail | None = None
    tail_start: int | None = None

    def __post_init__(self):
        _check_factor(self.factor)
        tail = self.tail or GeoTail.zero(self.factor.p, _ncomp(self.factor))
        tail_start = self.start if self.tail_start is None else max(self.start, self.tail_start)
        object.__setattr__(self, 'tail', tail)
        object.__setattr__(self, 'tail_start', tail_start)
        kept = {}
        for i, value in dict(self.exceptions).items():
            if i < self.start:
                if not _is_zero_value(value):
                    raise IncompatibleShapesError(f'slot {i} is below the product start {self.start}')
                continue
            if value != self._default(i):
                kept[i] = value
        object.__setattr__(self, 'exceptions', tuple(sorted(kept.items(), key=lambda kv: kv[0])))

    def _default(self, i: int):
        if i >= self.tail_start:
            return _pack(self.factor, self.tail.entry(i))
        return _zero_value(self.factor)

    @property
    def p(self) -> int:
        return self.factor.p

    def entry(self, i: int):
        if i < self.start:
            raise IndexError(f'slot {i} is below the product start {self.start}')
        exceptions = dict(self.exceptions)
        if i in exceptions:
            return exceptions[i]
        return self._default(i)

    def is_zero(self) -> bool:
        return not self.exceptions and self.tail.is_zero()

    def _check(self, other: SeqElt) -> None:
        if (self.factor, self.start) != (other.factor, other.start):
            raise IncompatibleShapesError('elements of different products')

    def __add__(self, other: SeqElt) -> SeqElt:
        self._check(other)
        lo, hi = sorted((self.tail_start, other.tail_start))
        indices = {i for i, _ in self.exceptions} | {i for i, _ in other.exceptions}
        indices |= set(range(lo, hi))
        exceptions = tuple((i, self.entry(i) + other.entry(i)) for i in sorted(indices))
        return SeqElt(self.factor, self.start, exceptions, self.tail + other.tail, hi)

    def __rmul__(self, n: int) -> SeqElt:
        exceptions = tuple((i, n * v) for i, v in self.exceptions)
        return SeqElt(self.factor, self.start, exceptions, self.tail.scale(n), self.tail_start)

    def __neg__(self) -> SeqElt:
        return -1 * self

    def __sub__(self, other: SeqElt) -> SeqElt:
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeqElt):
            return NotImplemented
        return (self.factor, self.start) == (other.factor, other.start) and (self - other).is_zero()

    def __hash__(self) -> int:
        return hash((self.factor, self.start))

    def x_act(self) -> SeqElt:
        if _ncomp(self.factor) == 1:
            return SeqElt(self.factor, self.start)
        exceptions = tuple((i, v.x_act()) for i, v in self.exceptions)
        return SeqElt(self.factor, self.start, exceptions, self.tail.x_act(), self.tail_start)

    def scalar_act(self, r: RingElt) -> SeqElt:
        if r.a.denominator != 1 or r.b.denominator != 1:
            raise ValueError(f'{r} is not an integral ring element')
        return int(r.a) * self + int(r.b) * self.x_act()

    def alternate(self) -> SeqElt:
        """Multiply slot i by (-1)^i."""
        exceptions = tuple((i, (-1) ** (i % 2) * v) for i, v in self.exceptions)
        return SeqElt(self.factor, self.start, exceptions, self.tail.alternate(), self.tail_start)

    def distinct_values(self) -> list:
        """Every value that occurs in infinitely or finitely many slots, zero aside."""
        values = [v for _, v in self.exceptions]
        if self.tail_start > self.start:
            values.append(_zero_value(self.factor))
        values += [_pack(self.factor, self.tail.entry(self.tail_start + k)) for k in (0, 1)]
        return values

    def max_expo(self, c: int) -> int:
        """Largest exponent in component c; only meaningful when that component is bounded."""
        return max((_unpack(v)[c].expo for v in self.distinct_values()), default=0)

    def annihilator(self) -> Ideal:
        return seq_annihilator(self)

    def __str__(self) -> str:
        exc = ', '.join(f'{i}: {v}' for i, v in self.exceptions)
        return f'[{exc}{"; " if exc else ""}i>={self.tail_start}: {self.tail}]'


def seq_annihilator(e: SeqElt) -> Ideal:
    p = e.p
    tail = e.tail
    if _ncomp(e.factor) == 1:
        if tail.component_unbounded(0):
            return Ideal.generated(RingElt.x())
        return Ideal.generated(RingElt(p ** e.max_expo(0)), RingElt.x())
    if tail.component_unbounded(1):
        return Ideal.zero()
    if tail.component_unbounded(0):
        # only multiples of x survive, and p^k1 x kills every f1
        return Ideal.generated(RingElt(0, p ** e.max_expo(1)))
    values = e.distinct_values()
    k = max(e.max_expo(0), e.max_expo(1))
    rows = []
    for v in values:
        u0 = v.f0.num * p ** (k - v.f0.expo)
        u1 = v.f1.num * p ** (k - v.f1.expo)
        rows += [[u0, u1], [u1, 0]]
    return Ideal.from_lattice(kernel_mod(IntMatrix.from_rows(rows), p**k))


def _nilpotency(value) -> int:
    if isinstance(value, EElt):
        return value.nilpotency_index()
    return value.expo


@dataclass(frozen=True)
class Torsion:
    k: int


@dataclass(frozen=True)
class NotTorsion:
    index: int
    power: int
    proof: str


@dataclass(frozen=True)
class Unknown:
    reason: str


def _slot_growth(p: int, terms: Sequence[TailTerm]) -> dict[int, int]:
    """For each slot parity r, the d with order p^(i + d) at large slots i = r mod 2.

    A parity is left out when the rate-1 terms cancel on it.
    """
    rate1 = [t for t in terms if t.rate == 1]
    top = max(t.offset for t in rate1)
    growth = {}
    for r in (0, 1):
        s = sum((-1 if t.alternating and r else 1) * t.coeff * p ** (top - t.offset) for t in rate1)
        if s:
            growth[r] = top - p_valuation(s, p)
    return growth


def _unbounded_witness(e: SeqElt, bound: int) -> tuple[int, int]:
    """Least slot whose unbounded component has order beyond p^bound, and that component."""
    lo = max([e.tail_start] + [i + 1 for i, _ in e.exceptions])
    candidates = []
    for c, terms in enumerate(e.tail.components):
        if not e.tail.component_unbounded(c):
            continue
        floor = max([bound] + [t.offset for t in terms if t.rate == 0])
        for r, d in _slot_growth(e.p, terms).items():
            i = max(lo, floor - d + 1)
            i += (i - r) % 2
            candidates.append((i, c))
    return min(candidates)


def is_torsion(e: SeqElt, a: Ideal, bound: int) -> Torsion | NotTorsion | Unknown:
    """Decide whether a^k e = 0 for some k <= bound, for a = (x) or a = (p, x).

    An unbounded tail is never torsion; the witness slot is read off its terms.
    """
    x_ideal = PrimeIdeal.minimal_x().ideal
    n_ideal = PrimeIdeal.maximal_at(e.p).ideal
    if e.is_zero():
        return Torsion(0)
    if a == x_ideal:
        return Torsion(1 if e.x_act().is_zero() else 2)
    if a != n_ideal:
        raise ValueError(f'torsion is decided for (x) and ({e.p},x), not {a}')
    if e.tail.is_unbounded():
        i, c = _unbounded_witness(e, bound)
        proof = (
            f'component {c} of the tail {e.tail} has a term with denominator '
            f'p^(i+offset), and at slot {i} its order exceeds p^{bound}'
        )
        return NotTorsion(i, bound, proof)
    k = max(_nilpotency(v) for v in e.distinct_values())
    if k <= bound:
        return Torsion(k)
    return Unknown(f'needs ({e.p},x)^{k}, beyond the bound {bound}')


@dataclass(frozen=True)
class ProductModule:
    factor: StdInjective | MModule
    start: int

    def __post_init__(self):
        _check_factor(self.factor)

    @property
    def p(self) -> int:
        return self.factor.p

    @property
    def ncomp(self) -> int:
        return _ncomp(self.factor)

    def is_zero(self) -> bool:
        return False

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        # the witness below has annihilator inside every prime
        return False

    def zero(self) -> SeqElt:
        return SeqElt(self.factor, self.start)

    def single(self, i: int, value) -> SeqElt:
        return SeqElt(self.factor, self.start, ((i, value),))

    def constant(self, value) -> SeqElt:
        tail = GeoTail.constant(self.p, [f.fraction for f in _unpack(value)])
        return SeqElt(self.factor, self.start, (), tail)

    def geometric(self, component: int = 0, coeff: int = 1, offset: int = 1) -> SeqElt:
        tail = GeoTail.geometric(self.p, self.ncomp, component, coeff, offset)
        return SeqElt(self.factor, self.start, (), tail)

    def socle_value(self):
        return _pack(self.factor, (PruferElt(self.p, 1, 1),) + (PruferElt(self.p),) * (self.ncomp - 1))

    def random_element(self, rng: random.Random, max_expo: int = 4) -> SeqElt:
        p = self.p

        def value():
            return _pack(
                self.factor,
                tuple(
                    PruferElt(p, rng.randrange(p**k), k)
                    for k in (rng.randint(0, max_expo) for _ in range(self.ncomp))
                ),
            )

        exceptions = tuple(
            (self.start + rng.randint(0, 5), value()) for _ in range(rng.randint(0, 3))
        )
        terms = []
        for _ in range(self.ncomp):
            comp = []
            for _ in range(rng.randint(0, 2)):
                comp.append(
                    TailTerm(
                        rng.randint(0, 1),
                        rng.random() < 0.3,
                        rng.randint(0, max_expo),
                        rng.randint(-p**2, p**2),
                    )
                )
            terms.append(tuple(comp))
        tail = GeoTail(p, tuple(terms))
        return SeqElt(self.factor, self.start, exceptions, tail, self.start + rng.randint(0, 4))

    def describe(self) -> str:
        return f'prod_(i>={self.start}) {self.factor.describe()}'

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class Yes:
    witness: SeqElt


@dataclass(frozen=True)
class BoundedNo:
    searched: int


@dataclass(frozen=True)
class OutsideUpperBound:
    reason: str


def ass_membership(m: ProductModule, prime: PrimeIdeal) -> Yes | BoundedNo | OutsideUpperBound:
    """Is prime associated to the product? Witness search over a fixed family of tails."""
    upper = m.factor.associated_primes()
    if not any(prime.contained_in(q) for q in upper):
        return OutsideUpperBound(
            f'{prime} lies in no associated prime of the factor ({", ".join(map(str, upper))})'
        )
    candidates = [
        m.single(m.start, m.socle_value()),
        m.constant(m.socle_value()),
        m.geometric(0, 1, 1 - m.start),
    ]
    target = prime.ideal
    for candidate in candidates:
        if ann_element(candidate) == target:
            return Yes(candidate)
    log.warning('No witness for %s in %s among %d candidates', prime, m, len(candidates))
    return BoundedNo(len(candidates))


class SlotKind(StrEnum):
    ZERO = 'zero'
    SOCLE = 'socle'
    MPART = 'mpart'
    FULL = 'full'


_RANK = {SlotKind.ZERO: 0, SlotKind.SOCLE: 1, SlotKind.MPART: 2, SlotKind.FULL: 3}


def _slot_allows(kind: SlotKind, value) -> bool:
    match kind:
        case SlotKind.FULL:
            return True
        case SlotKind.ZERO:
            return value.is_zero()
        case SlotKind.MPART:
            return not isinstance(value, EElt) or value.f1.is_zero()
        case SlotKind.SOCLE:
            return _nilpotency(value) <= 1 and (not isinstance(value, EElt) or value.f1.is_zero())


@dataclass(frozen=True)
class SubProductConstraint:
    """Submodule of a product cut out slot by slot."""

    start: int
    uniform: SlotKind
    exceptions: tuple[tuple[int, SlotKind], ...] = ()

    def kind_at(self, i: int) -> SlotKind:
        return dict(self.exceptions).get(i, self.uniform)

    def is_contained_in(self, other: SubProductConstraint) -> bool:
        indices = {i for i, _ in self.exceptions} | {i for i, _ in other.exceptions}
        if _RANK[self.uniform] > _RANK[other.uniform]:
            return False
        return all(_RANK[self.kind_at(i)] <= _RANK[other.kind_at(i)] for i in indices)

    def contains(self, e: SeqElt) -> bool:
        last = max([i for i, _ in self.exceptions] + [i for i, _ in e.exceptions] + [e.tail_start])
        for i in range(self.start, last + 3):
            if i >= e.start and not _slot_allows(self.kind_at(i), e.entry(i)):
                return False
        tail = e.tail
        match self.uniform:
            case SlotKind.ZERO:
                return tail.is_zero()
            case SlotKind.MPART:
                return tail.ncomp == 1 or tail.component_is_zero(1)
            case SlotKind.SOCLE:
                if tail.is_unbounded() or (tail.ncomp == 2 and not tail.component_is_zero(1)):
                    return False
                return all(v.expo <= 1 for k in (0, 1) for v in tail.entry(k))
        return True


def _maximal_ideal(p: int) -> FgModule:
    """The ideal (p, x) of R on the Z-basis p, x."""
    return FgModule(2, IntMatrix.zeros(2, 0), IntMatrix.from_rows([[0, 0], [p, 0]]))


def _slot_quotient(p: int, top: SlotKind, bottom: SlotKind) -> FgModule | None:
    """Matlis dual of one slot of top/bottom inside E; None for the zero quotient."""
    match (top, bottom):
        case (t, b) if t == b:
            return None
        case (SlotKind.MPART, SlotKind.ZERO) | (SlotKind.FULL, SlotKind.MPART):
            return FgModule.abelian([0])
        case (SlotKind.MPART, SlotKind.SOCLE):
            return FgModule.abelian([0])
        case (SlotKind.FULL, SlotKind.ZERO):
            return FgModule.free(1)
        case (SlotKind.FULL, SlotKind.SOCLE):
            # E/soc E is dual to the maximal ideal
            return _maximal_ideal(p)
        case (SlotKind.SOCLE, SlotKind.ZERO):
            return FgModule.abelian([p])
    raise IncompatibleShapesError(f'no descriptor for a slot quotient {top}/{bottom}')


def _uniform_factor(p: int, top: SlotKind, bottom: SlotKind) -> StdInjective | MModule:
    match (top, bottom):
        case (SlotKind.FULL, SlotKind.ZERO):
            return StdInjective.emax(p)
        case (SlotKind.MPART, SlotKind.ZERO) | (SlotKind.FULL, SlotKind.MPART) | (SlotKind.MPART, SlotKind.SOCLE):
            return MModule(p)
    raise IncompatibleShapesError(f'no descriptor for a product of {top}/{bottom} quotients')


def constraint_quotient(factor, top: SubProductConstraint, bottom: SubProductConstraint):
    """Descriptor of top/bottom for two constraints on the same product.

    When the uniform kinds differ the quotient is a product, and every
    exceptional slot must have the same quotient as the uniform slots.
    """
    if not bottom.is_contained_in(top):
        raise IncompatibleShapesError('the denominator is not a submodule of the numerator')
    p = factor.p
    indices = sorted({i for i, _ in top.exceptions} | {i for i, _ in bottom.exceptions})
    if top.uniform != bottom.uniform:
        uniform = _uniform_factor(p, top.uniform, bottom.uniform)
        expected = _slot_quotient(p, top.uniform, bottom.uniform)
        for i in indices:
            top_kind, bottom_kind = top.kind_at(i), bottom.kind_at(i)
            if _slot_quotient(p, top_kind, bottom_kind) != expected:
                raise IncompatibleShapesError(
                    f'slot {i} has quotient {top_kind}/{bottom_kind} inside a product of '
                    f'{top.uniform}/{bottom.uniform} quotients'
                )
        return ProductModule(uniform, top.start)
    duals = [_slot_quotient(p, top.kind_at(i), bottom.kind_at(i)) for i in indices]
    duals = [d for d in duals if d is not None]
    if not duals:
        return ZeroModule()
    return ArtinianModule(p, direct_sum(*duals)).simplify()
