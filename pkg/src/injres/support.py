"""Small and big support, free resolutions, derived tensor and Hom with residue fields.

The residue field of (q, x) is the finitely presented module R/(q, x). The
residue field of (x) is Q = R/(x) tensor Q, and Q is flat over Z, so every
derived functor against k((x)) is the same functor against R/(x) followed by
rationalization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

from funlog import log_calls

from injres.complexes import (
    ChainMap,
    Concentrated,
    MapRule,
    Power,
    ProductOfShifts,
    Window,
    XTail,
    check_quasi_iso,
    degrees,
    gamma_torsion,
    hom_from_residue,
    term_at,
)
from injres.config import RESOLUTION_LENGTH
from injres.errors import ShapeError, TrustWindowError, VerdictDisagreementError
from injres.exactnum import (
    IntMatrix,
    PruferElt,
    column_basis,
    in_lattice,
    integer_kernel,
    lattice_equal,
    p_valuation,
    preimage,
)
from injres.modules import (
    MModule,
    RationalModule,
    StdInjective,
    ZeroModule,
    matlis_dual_homology,
    simplify,
)
from injres.presented import FgModule, block_diagonal, fp_homology
from injres.products import ProductModule, Yes, ass_membership
from injres.ring import X_MATRIX, Ideal, PrimeIdeal, RingElt, RMatrix

log = logging.getLogger(__name__)


# ---------------------------- Resolutions ---------------------------- #


@dataclass(frozen=True)
class FreeResolution:
    """... -> R^ranks[1] -> R^ranks[0] -> module -> 0.

    differentials[k - 1] maps F_k to F_{k-1}; the augmentation maps the
    interleaved coordinates of F_0 onto the module's coordinates.
    """

    module: FgModule
    length: int
    ranks: tuple[int, ...]
    differentials: tuple[RMatrix, ...]
    augmentation: IntMatrix

    def rank_at(self, k: int) -> int:
        return self.ranks[k] if 0 <= k < len(self.ranks) else 0

    def differential(self, k: int) -> RMatrix | None:
        """F_k -> F_{k-1}, or None past either end."""
        if 1 <= k <= len(self.differentials):
            return self.differentials[k - 1]
        return None

    @property
    def terminates(self) -> bool:
        """The last computed kernel was zero, so the resolution is finite."""
        return len(self.ranks) <= self.length

    def is_exact(self) -> bool:
        """d^2 = 0 and ker = im at every interior term, and F_0 covers the module."""
        for k in range(1, len(self.differentials)):
            if not (self.differentials[k - 1] @ self.differentials[k]).is_zero():
                return False
        module = self.module
        if self.ranks:
            image = column_basis(self.augmentation.hstack(module.relations))
            if not all(in_lattice(image, col) for col in IntMatrix.identity(module.rank).columns()):
                return False
            kernel = preimage(self.augmentation, module.relations)
            first = self.differential(1)
            boundaries = first.expand() if first else IntMatrix.zeros(kernel.nrows, 0)
            if not lattice_equal(kernel, boundaries):
                return False
        for k in range(1, len(self.differentials)):
            cycles = integer_kernel(self.differentials[k - 1].expand())
            if not lattice_equal(cycles, self.differentials[k].expand()):
                return False
        if self.terminates and self.differentials:
            return integer_kernel(self.differentials[-1].expand()).ncols == 0
        return True


def _r_span(generators: list[tuple[int, ...]], x_action: IntMatrix, size: int) -> IntMatrix:
    cols = []
    for g in generators:
        cols += [g, x_action.apply(g)]
    return IntMatrix.from_columns(cols, size)


def _r_generators(
    candidates: list[tuple[int, ...]], x_action: IntMatrix, modulo: IntMatrix
) -> list[tuple[int, ...]]:
    """A pruned set of R-generators for span(candidates) + modulo, modulo `modulo`."""
    size = x_action.nrows
    kept: list[tuple[int, ...]] = []
    for col in candidates:
        if not in_lattice(_r_span(kept, x_action, size).hstack(modulo), col):
            kept.append(col)
    for g in list(kept):
        others = [h for h in kept if h != g]
        if in_lattice(_r_span(others, x_action, size).hstack(modulo), g):
            kept = others
    return kept


def _as_r_matrix(generators: list[tuple[int, ...]], rank: int) -> RMatrix:
    """Columns are generators written in interleaved (a, b) coordinates of R^rank."""
    rows = [[(g[2 * j], g[2 * j + 1]) for g in generators] for j in range(rank)]
    return RMatrix.from_rows(rows, len(generators))


@lru_cache(maxsize=64)
@log_calls(level='debug', show_timing_only=True)
def free_resolution(module: FgModule, length: int = RESOLUTION_LENGTH) -> FreeResolution:
    if length < 1:
        raise ValueError(f'resolution length must be at least 1, got {length}')
    n = module.rank
    identity = IntMatrix.identity(n).columns()
    generators = _r_generators(identity, module.x_action, module.relations)
    if not generators:
        return FreeResolution(module, length, (), (), IntMatrix.zeros(n, 0))
    augmentation = _r_span(generators, module.x_action, n)
    ranks = [len(generators)]
    differentials = []
    kernel = preimage(augmentation, module.relations)
    while len(ranks) <= length:
        x_block = block_diagonal(*[X_MATRIX] * ranks[-1])
        gens = _r_generators(column_basis(kernel).columns(), x_block, IntMatrix.zeros(kernel.nrows, 0))
        if not gens:
            break
        d = _as_r_matrix(gens, ranks[-1])
        differentials.append(d)
        ranks.append(len(gens))
        kernel = integer_kernel(d.expand())
    log.debug('Resolution of %s: ranks %s', module, ranks)
    return FreeResolution(module, length, tuple(ranks), tuple(differentials), augmentation)


# --------------------------- Derived functors --------------------------- #


def residue_module(prime: PrimeIdeal) -> FgModule:
    """R/(q, x) for a maximal prime; R/(x) for (x), to be rationalized afterwards."""
    if prime.is_maximal:
        return FgModule.residue(prime.q)
    return FgModule.cyclic(Ideal.generated(RingElt.x()))


def rationalize(module):
    """module tensor Q, as a descriptor."""
    match module:
        case FgModule():
            return RationalModule(module.free_rank)
        case RationalModule():
            return module
    return RationalModule(0)


def _check_trust(degree: int, length: int) -> None:
    if degree >= length - 1:
        raise TrustWindowError(
            f'degree {degree} is outside the trust window of a length-{length} resolution'
        )


def _power_homology(
    n: FgModule, rank: int, incoming: RMatrix | None, outgoing: RMatrix | None
) -> FgModule:
    """Homology at n^rank of a complex of powers of n with R-matrix maps."""
    if rank == 0 or n.rank == 0:
        return FgModule.zero()

    def relations(r: int) -> IntMatrix:
        return block_diagonal(*[n.relations] * r)

    leaving = outgoing if outgoing is not None and outgoing.nrows else None
    arriving = incoming if incoming is not None and incoming.ncols else None
    return fp_homology(
        incoming=None if arriving is None else arriving.expand(n.x_action),
        outgoing=None if leaving is None else leaving.expand(n.x_action),
        relations=relations(rank),
        relations_out=None if leaving is None else relations(leaving.nrows),
        x_action=block_diagonal(*[n.x_action] * rank),
    )


def _transpose(d: RMatrix | None) -> RMatrix | None:
    return None if d is None else d.transpose()


def derived_tensor_homology(target, resolved: FgModule, degree: int, length: int = RESOLUTION_LENGTH):
    """Tor_degree(resolved, target) from a free resolution of `resolved`."""
    if degree < 0:
        return ZeroModule()
    _check_trust(degree, length)
    res = free_resolution(resolved, length)
    match target:
        case ZeroModule():
            return ZeroModule()
        case FgModule():
            return _power_homology(
                target, res.rank_at(degree), res.differential(degree + 1), res.differential(degree)
            )
        case RationalModule(dim=dim):
            tor = derived_tensor_homology(
                FgModule.cyclic(Ideal.generated(RingElt.x())), resolved, degree, length
            )
            return RationalModule(dim * tor.free_rank)
        case StdInjective() if not target.is_max:
            return rationalize(derived_tensor_homology(FgModule.free(1), resolved, degree, length))
        case StdInjective() | MModule():
            ranks = {-k: r for k, r in enumerate(res.ranks)}
            maps = {-k: res.differential(k) for k in range(1, len(res.ranks))}
            return matlis_dual_homology(target, ranks, maps, -degree)
    raise ShapeError(f'no derived tensor with {target}')


def derived_hom_cohomology(target, resolved: FgModule, degree: int, length: int = RESOLUTION_LENGTH):
    """Ext^degree(resolved, target) from a free resolution of `resolved`."""
    if degree < 0:
        return ZeroModule()
    _check_trust(degree, length)
    res = free_resolution(resolved, length)
    match target:
        case ZeroModule():
            return ZeroModule()
        case FgModule():
            return _power_homology(
                target,
                res.rank_at(degree),
                _transpose(res.differential(degree)),
                _transpose(res.differential(degree + 1)),
            )
        case RationalModule(dim=dim):
            ext = derived_hom_cohomology(
                FgModule.cyclic(Ideal.generated(RingElt.x())), resolved, degree, length
            )
            return RationalModule(dim * ext.free_rank)
        case StdInjective() if not target.is_max:
            return rationalize(derived_hom_cohomology(FgModule.free(1), resolved, degree, length))
        case StdInjective() | MModule():
            ranks = dict(enumerate(res.ranks))
            maps = {k: res.differential(k + 1).transpose() for k in range(len(res.ranks) - 1)}
            return matlis_dual_homology(target, ranks, maps, degree)
    raise ShapeError(f'no derived Hom into {target}')


def residue_tor(target, prime: PrimeIdeal, degree: int, length: int = RESOLUTION_LENGTH):
    tor = derived_tensor_homology(target, residue_module(prime), degree, length)
    return simplify(tor) if prime.is_maximal else rationalize(tor)


def residue_ext(target, prime: PrimeIdeal, degree: int, length: int = RESOLUTION_LENGTH):
    ext = derived_hom_cohomology(target, residue_module(prime), degree, length)
    return simplify(ext) if prime.is_maximal else rationalize(ext)


@dataclass(frozen=True)
class CechCohomology:
    """H^0 and H^1 of N -> N[1/q] for a finitely generated N."""

    q: int
    h0: tuple[int, ...]
    h1_nonzero: bool

    @property
    def nonzero(self) -> bool:
        return bool(self.h0) or self.h1_nonzero

    def describe(self) -> str:
        h0 = ' + '.join(f'Z/{d}' for d in self.h0) or '0'
        h1 = f'Z[1/{self.q}]/Z-type' if self.h1_nonzero else '0'
        return f'H^0 = {h0}, H^1 = {h1}'


def local_cohomology_fg(n: FgModule | RationalModule, m: PrimeIdeal) -> CechCohomology:
    """Local cohomology at (q, x); x is nilpotent, so only q matters."""
    q = m.q
    if isinstance(n, RationalModule):
        return CechCohomology(q, (), False)
    h0 = tuple(q ** p_valuation(d, q) for d in n.torsion_orders if d % q == 0)
    return CechCohomology(q, h0, n.free_rank > 0)


# ------------------------------ Supports ------------------------------ #

MODULE_SPECIES = (FgModule, StdInjective, MModule, RationalModule, ZeroModule)


@dataclass(frozen=True)
class SupportObject:
    """A complex together with the module its shifts are built from and an injective model."""

    name: str
    shape: object
    model: object
    injective: object | None = None
    resolution_map: ChainMap | None = None


def decompose(shape, name: str | None = None) -> SupportObject:
    """Split a shape into shifted copies of one module, with a semi-injective model."""
    name = name or str(shape)
    match shape:
        case Concentrated(MModule(p=p) as module, d):
            injective = XTail(StdInjective.emax(p), d)
            return SupportObject(name, shape, module, injective, ChainMap(shape, injective, MapRule.IOTA))
        case Concentrated(StdInjective() as module, _) | Concentrated(ZeroModule() as module, _):
            return SupportObject(name, shape, module, shape, ChainMap(shape, shape, MapRule.IDENTITY))
        case Concentrated(module, _):
            return SupportObject(name, shape, module)
        case ProductOfShifts(base=Concentrated(MModule(p=p) as module, d), shift=s):
            injective = ProductOfShifts(XTail(StdInjective.emax(p), d), s)
            return SupportObject(name, shape, module, injective, ChainMap(shape, injective, MapRule.IOTA))
        case XTail(factor, _, _) | ProductOfShifts(base=XTail(factor, _, _)) if factor.is_max:
            return SupportObject(
                name, shape, MModule(factor.p), shape, ChainMap(shape, shape, MapRule.IDENTITY)
            )
    raise ShapeError(f'{shape} does not decompose into shifted copies of one module')


@dataclass(frozen=True)
class Evidence:
    nonzero: bool
    detail: str


@dataclass(frozen=True)
class SupportReport:
    prime: PrimeIdeal
    in_small_support: Evidence
    in_big_support: bool


def tensor_evidence(model, prime: PrimeIdeal, length: int = RESOLUTION_LENGTH) -> Evidence:
    """Nonvanishing of Tor_*(k(P), model) in the trust window."""
    for degree in range(length - 1):
        tor = residue_tor(model, prime, degree, length)
        if not tor.is_zero():
            return Evidence(True, f'Tor_{degree}(k{prime}, {model.describe()}) = {tor.describe()}')
    log.debug('Tor(k%s, %s) vanishes in degrees 0..%d', prime, model.describe(), length - 2)
    return Evidence(False, f'Tor_n(k{prime}, {model.describe()}) = 0 for 0 <= n <= {length - 2}')


def ext_evidence(model, prime: PrimeIdeal, length: int = RESOLUTION_LENGTH) -> Evidence:
    for degree in range(length - 1):
        ext = residue_ext(model, prime, degree, length)
        if not ext.is_zero():
            return Evidence(True, f'Ext^{degree}(k{prime}, {model.describe()}) = {ext.describe()}')
    return Evidence(False, f'Ext^n(k{prime}, {model.describe()}) = 0 for 0 <= n <= {length - 2}')


def small_support(
    x, primes: list[PrimeIdeal], length: int = RESOLUTION_LENGTH
) -> list[SupportReport]:
    """Per-prime Foxby support verdicts for a module or a decomposable shape."""
    model = x if isinstance(x, MODULE_SPECIES) else decompose(x).model
    reports = []
    for prime in primes:
        evidence = tensor_evidence(model, prime, length)
        reports.append(SupportReport(prime, evidence, not model.vanishes_at(prime)))
        log.debug('%s in supp %s: %s', prime, model.describe(), evidence.nonzero)
    return reports


def support_set(reports: list[SupportReport]) -> list[PrimeIdeal]:
    return [r.prime for r in reports if r.in_small_support.nonzero]


def big_support_set(reports: list[SupportReport]) -> list[PrimeIdeal]:
    return [r.prime for r in reports if r.in_big_support]


# ------------------------ Three-way equivalence ------------------------ #


@dataclass(frozen=True)
class EquivalenceReport:
    name: str
    prime: PrimeIdeal
    tensor: Evidence
    hom: Evidence
    torsion: Evidence

    @property
    def agree(self) -> bool:
        return self.tensor.nonzero == self.hom.nonzero == self.torsion.nonzero

    def describe(self) -> str:
        flags = '/'.join('1' if e.nonzero else '0' for e in (self.tensor, self.hom, self.torsion))
        return f'{self.name} at {self.prime}: {flags}'


def check_support_equivalence(
    x,
    m: PrimeIdeal,
    window: Window,
    bound: int = 12,
    length: int = RESOLUTION_LENGTH,
) -> EquivalenceReport:
    """Tensor, Hom and torsion nonvanishing at a maximal prime, each computed its own way."""
    if not m.is_maximal:
        raise ValueError(f'the equivalence is checked at maximal primes, not {m}')
    obj = x if isinstance(x, SupportObject) else decompose(x)
    tensor = tensor_evidence(obj.model, m, length)
    if obj.injective is None:
        hom = ext_evidence(obj.model, m, length)
        cech = local_cohomology_fg(obj.model, m)
        torsion = Evidence(cech.nonzero, f'Cech: {cech.describe()}')
    else:
        residue = hom_from_residue(obj.injective, m, window)
        hom = Evidence(
            residue.cohomology_nonzero,
            f'Hom(k{m}, injective model): {residue.witness or "zero"}; '
            f'differential vanishes: {residue.differential_vanishes}',
        )
        gamma = gamma_torsion(obj.injective, m, window, bound)
        torsion = Evidence(gamma.cohomology_nonzero, gamma.cohomology_witness or gamma.certificate)
    report = EquivalenceReport(obj.name, m, tensor, hom, torsion)
    if not report.agree:
        log.error('Support verdicts disagree: %s', report.describe())
    return report


def require_agreement(reports: list[EquivalenceReport]) -> None:
    bad = [r.describe() for r in reports if not r.agree]
    if bad:
        raise VerdictDisagreementError('; '.join(bad))


@dataclass(frozen=True)
class InclusionReport:
    quasi_iso: bool
    small: tuple[PrimeIdeal, ...]
    ass_union: tuple[PrimeIdeal, ...]
    strict_witness: str | None = None

    @property
    def holds(self) -> bool:
        return set(self.small) <= set(self.ass_union)

    @property
    def equality(self) -> bool:
        return set(self.small) == set(self.ass_union)


def term_ass(term, primes: list[PrimeIdeal]) -> dict[PrimeIdeal, str]:
    """Associated primes of a term among `primes`, each with a witness."""
    match term:
        case ProductModule():
            found = {}
            for prime in primes:
                verdict = ass_membership(term, prime)
                if isinstance(verdict, Yes):
                    found[prime] = str(verdict.witness)
            return found
        case Power(species=species):
            return term_ass(species, primes)
        case StdInjective():
            return {term.at: str(term.socle_generator())} if term.at in primes else {}
        case FgModule():
            return {prime: str(w) for prime, w in term.associated_primes().items() if prime in primes}
        case MModule(p=p):
            prime = PrimeIdeal.maximal_at(p)
            return {prime: str(PruferElt(p, 1, 1))} if prime in primes else {}
    return {}


def check_support_inclusion(
    x, i, primes: list[PrimeIdeal], window: Window, length: int = RESOLUTION_LENGTH
) -> InclusionReport:
    """small_support(x) inside the union of ass(i^n), with i quasi-isomorphic to x."""
    obj = decompose(x)
    if i == x:
        quasi_iso = True
    elif obj.resolution_map is not None and obj.injective == i:
        quasi_iso = check_quasi_iso(obj.resolution_map, window).iso
    else:
        raise ShapeError(f'no comparison map from {x} to {i}')
    small = support_set(small_support(obj.model, primes, length))
    union: dict[PrimeIdeal, str] = {}
    for n in degrees(window):
        for prime, witness in term_ass(term_at(i, n), primes).items():
            union.setdefault(prime, f'degree {n}: {witness}')
    extra = [prime for prime in primes if prime in union and prime not in small]
    witness = f'{extra[0]} in ass, not in supp; {union[extra[0]]}' if extra else None
    return InclusionReport(
        quasi_iso,
        tuple(small),
        tuple(sorted(union, key=lambda p: p.sort_key)),
        witness,
    )
