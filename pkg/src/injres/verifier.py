"""Scenarios: the claim checklist run against the engine's concrete objects.

Each check is a function of the scenario and its own seeded generator that
returns an Outcome (or a Skip). run_scenario times every check and turns any
exception into a failed check carrying the exception text.
"""

from __future__ import annotations

import logging
import random
import time
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

from funlog import log_calls
from sympy import isprime, primerange

from injres.complexes import (
    ChainMap,
    Concentrated,
    MapRule,
    NotContractible,
    Window,
    acyclicity_certificate,
    check_commutes,
    check_d_squared,
    check_minimal,
    check_quasi_iso,
    contractibility_verdict,
    differential,
    is_acyclic,
    is_zero,
    is_zero_complex,
    localize_complex,
    not_homotopically_injective_witness,
    sample_element,
    shifted_copies,
    special_elements,
    tail_product,
    tail_resolution,
)
from injres.config import (
    DEFAULT_PRIME,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TORSION_BOUND,
    DEFAULT_WINDOW,
    INJECTIVE_PRIME_BOUND,
    SUPPORT_PRIME_BOUND,
    UNIT_ACTION_EXPONENT,
)
from injres.errors import ConfigError
from injres.modules import (
    EElt,
    Finite,
    Infinite,
    MModule,
    StdInjective,
    ann_element,
    length_over_localization,
    scalar_act,
    unit_action_is_bijective,
    unit_action_method,
)
from injres.presented import FgModule
from injres.products import BoundedNo, OutsideUpperBound, ProductModule, Yes, ass_membership
from injres.ring import PrimeIdeal, RingElt, spec_enumerate
from injres.support import (
    big_support_set,
    check_support_equivalence,
    check_support_inclusion,
    decompose,
    small_support,
    support_set,
)
from injres.utils import derive_rng

log = logging.getLogger(__name__)


class Status(StrEnum):
    PASS = 'pass'
    FAIL = 'fail'
    SKIPPED = 'skipped'


@dataclass(frozen=True)
class Scenario:
    name: str
    prime: int = DEFAULT_PRIME
    window: Window = DEFAULT_WINDOW
    torsion_bound: int = DEFAULT_TORSION_BOUND
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ConfigError(
                f'unknown scenario {self.name!r}; choose from {", ".join(SCENARIOS)}'
            )
        if not isprime(self.prime):
            raise ConfigError(f'{self.prime} is not a prime')
        lo, hi = self.window
        if lo > hi:
            raise ConfigError(f'window {lo}:{hi} is empty')
        if self.torsion_bound < 1:
            raise ConfigError('torsion bound must be positive')
        if self.samples < 0:
            raise ConfigError('sample count must not be negative')


@dataclass(frozen=True)
class Outcome:
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class Skip:
    reason: str


@dataclass(frozen=True)
class Check:
    name: str
    claim: str
    status: Status
    witness: str | None
    elapsed_ms: int


@dataclass(frozen=True)
class Report:
    scenario: Scenario
    checks: tuple[Check, ...]

    @property
    def overall(self) -> Status:
        ran = [c for c in self.checks if c.status is not Status.SKIPPED]
        return Status.PASS if all(c.status is Status.PASS for c in ran) else Status.FAIL


CheckFn = Callable[[Scenario, random.Random], Outcome | Skip]


def _support_primes(p: int) -> list[PrimeIdeal]:
    primes = spec_enumerate(SUPPORT_PRIME_BOUND)
    if PrimeIdeal.maximal_at(p) not in primes:
        primes.append(PrimeIdeal.maximal_at(p))
    return primes


def _names(primes) -> str:
    return '{' + ', '.join(map(str, primes)) + '}'


# --------------------------- Counterexample --------------------------- #


def minimal_resolution(s: Scenario, rng: random.Random) -> Outcome:
    report = check_minimal(tail_product(s.prime), s.window, s.samples, rng)
    sampled = sum(d.sampled for d in report.degrees)
    return Outcome(report.minimal, report.failure or f'{sampled} elements checked')


def differential_squares_to_zero(s: Scenario, rng: random.Random) -> Outcome | Skip:
    if s.samples == 0:
        return Skip('no samples requested')
    result = check_d_squared(tail_product(s.prime), s.window, s.samples, rng)
    return Outcome(result.ok, result.failure or f'{result.sampled} elements checked')


def resolution_quasi_iso(s: Scenario, rng: random.Random) -> Outcome:
    iota = ChainMap(shifted_copies(s.prime), tail_product(s.prime), MapRule.IOTA)
    report = check_quasi_iso(iota, s.window)
    if not report.iso:
        bad = next(d for d in report.degrees if not d.iso)
        return Outcome(False, f'H^{bad.degree}: {bad.source} -> {bad.target}')
    commutes = check_commutes(iota, s.window, min(s.samples, 20), rng)
    if not commutes.ok:
        return Outcome(False, commutes.failure)
    return Outcome(True, f'H^n(iota) iso for n in {s.window[0]}..{s.window[1]}')


def support_strictly_smaller(s: Scenario, rng: random.Random) -> Outcome:
    primes = _support_primes(s.prime)
    report = check_support_inclusion(shifted_copies(s.prime), tail_product(s.prime), primes, s.window)
    expected = (PrimeIdeal.maximal_at(s.prime),)
    strict = report.strict_witness is not None and PrimeIdeal.minimal_x() in report.ass_union
    return Outcome(
        report.quasi_iso and report.small == expected and report.holds and strict,
        f'supp X = {_names(report.small)}; ass I = {_names(report.ass_union)}; '
        f'{report.strict_witness}',
    )


def localized_acyclic(s: Scenario, rng: random.Random) -> Outcome:
    localized = localize_complex(tail_product(s.prime), PrimeIdeal.minimal_x())
    nonzero = not is_zero_complex(localized, s.window)
    acyclic = is_acyclic(localized, s.window)
    return Outcome(nonzero and acyclic, f'nonzero terms: {nonzero}; acyclic: {acyclic}')


def localized_not_contractible(s: Scenario, rng: random.Random) -> Outcome:
    localized = localize_complex(tail_product(s.prime), PrimeIdeal.minimal_x())
    verdict = contractibility_verdict(localized, s.window, min(s.samples, 20), rng)
    return Outcome(isinstance(verdict, NotContractible), str(verdict))


def localized_certificates(s: Scenario, rng: random.Random) -> Outcome | Skip:
    if s.samples == 0:
        return Skip('no samples requested')
    c = tail_product(s.prime)
    localized = localize_complex(c, PrimeIdeal.minimal_x())
    n = s.window[0]
    cocycles = [e for e in special_elements(c, n) if is_zero(differential(c, n, e))]
    cocycles += [sample_element(c, n, rng).x_act() for _ in range(min(s.samples, 20))]
    last = None
    for z in cocycles:
        last = acyclicity_certificate(localized, n, z)
    return Outcome(True, f'{len(cocycles)} cocycles lifted; last: d({last.preimage}) = {last.unit}.z')


def homotopy_injectivity(s: Scenario, rng: random.Random) -> Outcome:
    localized = localize_complex(tail_product(s.prime), PrimeIdeal.minimal_x())
    witness = not_homotopically_injective_witness(localized, 0)
    return Outcome(witness.acyclic, f'{witness.element} with annihilator {witness.annihilator}')


# ---------------------------- Support theory ---------------------------- #


def _equivalence_corpus(p: int) -> list[tuple[str, object]]:
    corpus = [
        ('R', Concentrated(FgModule.free(1))),
        ('R/(x)', Concentrated(FgModule.cyclic(PrimeIdeal.minimal_x().ideal))),
    ]
    corpus += [(f'R/({q},x)', Concentrated(FgModule.residue(q))) for q in primerange(2, 6)]
    corpus += [
        (f'E(R/({p},x))', Concentrated(StdInjective.emax(p))),
        ('E(R/(x))', Concentrated(StdInjective.emin())),
        ('M', Concentrated(MModule(p))),
        ('J', tail_resolution(p)),
        ('X', shifted_copies(p)),
    ]
    return corpus


def three_way_equivalence(s: Scenario, rng: random.Random) -> Outcome:
    maximal = [q for q in _support_primes(s.prime) if q.is_maximal]
    reports = []
    for name, shape in _equivalence_corpus(s.prime):
        obj = decompose(shape, name)
        for m in maximal:
            reports.append(check_support_equivalence(obj, m, s.window, s.torsion_bound))
    bad = [r.describe() for r in reports if not r.agree]
    if bad:
        return Outcome(False, 'disagreement: ' + '; '.join(bad))
    return Outcome(True, f'{len(reports)} object/prime pairs agree')


def support_inclusion(s: Scenario, rng: random.Random) -> Outcome:
    report = check_support_inclusion(
        shifted_copies(s.prime), tail_product(s.prime), _support_primes(s.prime), s.window
    )
    return Outcome(
        report.quasi_iso and report.holds,
        f'supp X = {_names(report.small)} inside {_names(report.ass_union)}',
    )


def small_versus_big_support(s: Scenario, rng: random.Random) -> Outcome:
    primes = _support_primes(s.prime)
    reports = small_support(StdInjective.emin(), primes)
    small, big = support_set(reports), big_support_set(reports)
    return Outcome(
        small == [PrimeIdeal.minimal_x()] and big == primes,
        f'supp E(R/(x)) = {_names(small)}; Supp = {_names(big)}',
    )


# ---------------------- Associated primes of products ---------------------- #


def product_ass_left(s: Scenario, rng: random.Random) -> Outcome:
    factor = StdInjective.emax(s.prime)
    product = ProductModule(factor, 0)
    verdict = ass_membership(product, PrimeIdeal.maximal_at(s.prime))
    if not isinstance(verdict, Yes):
        return Outcome(False, f'no witness for {PrimeIdeal.maximal_at(s.prime)}: {verdict}')
    for _ in range(s.samples):
        value = factor.random_element(rng, 6)
        slot = rng.randint(0, 8)
        if ann_element(product.single(slot, value)) != ann_element(value):
            return Outcome(False, f'ann of {value} changes in slot {slot}')
    return Outcome(True, f'witness {verdict.witness}; {s.samples} single-slot elements')


def product_ass_right(s: Scenario, rng: random.Random) -> Outcome:
    product = ProductModule(StdInjective.emax(s.prime), 0)
    upper = PrimeIdeal.maximal_at(s.prime)
    found = []
    for prime in spec_enumerate(SUPPORT_PRIME_BOUND):
        verdict = ass_membership(product, prime)
        match verdict:
            case Yes():
                if not prime.contained_in(upper):
                    return Outcome(False, f'{prime} is associated but not inside {upper}')
                found.append(prime)
            case BoundedNo():
                return Outcome(False, f'{prime}: search exhausted after {verdict.searched} shapes')
            case OutsideUpperBound():
                pass
    return Outcome(
        set(found) == {upper, PrimeIdeal.minimal_x()},
        f'ass = {_names(found)}, all inside {upper}',
    )


# ----------------------------- Injective hulls ----------------------------- #


def _method_ranges(methods: dict[int, str]) -> str:
    """'enumeration for k in 1..5, lattice for k in 6..8' from a method per exponent."""
    parts = []
    for method in dict.fromkeys(methods.values()):
        ks = [k for k, m in methods.items() if m == method]
        parts.append(f'{method} for k in {min(ks)}..{max(ks)}')
    return ', '.join(parts)


def unit_action(s: Scenario, rng: random.Random) -> Outcome:
    p = s.prime
    emax = StdInjective.emax(p)
    units = [RingElt(a, b) for a in sorted({1, p - 1, p + 1}) for b in (0, 1)]
    methods = {k: unit_action_method(emax, k) for k in range(1, UNIT_ACTION_EXPONENT + 1)}
    for k, method in methods.items():
        for u in units:
            if not unit_action_is_bijective(emax, u, k):
                return Outcome(False, f'{u} is not bijective on elements of order p^{k} ({method})')
    # elements of the maximal ideal are not
    for r in (RingElt(p), RingElt(0, 1), RingElt(p, 1)):
        if unit_action_is_bijective(emax, r, 2):
            return Outcome(False, f'{r} in the maximal ideal acts bijectively')
    return Outcome(
        True,
        f'{len(units)} units bijective on elements of order p^k; {_method_ranges(methods)}',
    )


def _power_torsion_exponent(e: EElt, p: int, bound: int) -> int | None:
    """Least k with (p, x)^k e = 0; (p, x)^k is generated by p^k and p^(k-1) x."""
    if e.is_zero():
        return 0
    for k in range(1, bound + 1):
        if scalar_act(RingElt(p**k), e).is_zero() and scalar_act(RingElt(0, p ** (k - 1)), e).is_zero():
            return k
    return None


def artinian_torsion(s: Scenario, rng: random.Random) -> Outcome | Skip:
    if s.samples == 0:
        return Skip('no samples requested')
    p = s.prime
    emax = StdInjective.emax(p)
    count = max(s.samples, 1000)
    worst = 0
    for _ in range(count):
        e = emax.random_element(rng, 6)
        k = _power_torsion_exponent(e, p, 2 * s.torsion_bound)
        if k is None:
            return Outcome(False, f'{e} is not killed by a power of the maximal ideal')
        if k != e.nilpotency_index():
            return Outcome(False, f'{e}: exponent {k}, nilpotency index {e.nilpotency_index()}')
        worst = max(worst, k)
    return Outcome(True, f'{count} elements, largest exponent {worst}')


def finite_length(s: Scenario, rng: random.Random) -> Outcome:
    emin = length_over_localization(StdInjective.emin())
    emax = length_over_localization(StdInjective.emax(s.prime))
    if emin != Finite(2) or not isinstance(emax, Infinite):
        return Outcome(False, f'E(R/(x)): {emin}; E(R/({s.prime},x)): {emax}')
    chain = ' < '.join(f'R.{e}' for e in emax.chain)
    return Outcome(True, f'E(R/(x)) has length 2; E(R/({s.prime},x)) contains {chain} < ...')


def injective_support(s: Scenario, rng: random.Random) -> Outcome:
    primes = spec_enumerate(INJECTIVE_PRIME_BOUND)
    for prime in primes:
        injective = StdInjective(prime)
        small = support_set(small_support(injective, primes))
        if small != [prime] or injective.associated_primes() != {prime}:
            return Outcome(False, f'supp E(R/{prime}) = {_names(small)}')
    return Outcome(True, f'supp E(R/P) = {{P}} = ass E(R/P) for {len(primes)} primes')


# --------------------------- Bounded below case --------------------------- #


def foxby_equality(s: Scenario, rng: random.Random) -> Outcome:
    report = check_support_inclusion(
        Concentrated(MModule(s.prime)), tail_resolution(s.prime), _support_primes(s.prime), s.window
    )
    expected = (PrimeIdeal.maximal_at(s.prime),)
    return Outcome(
        report.quasi_iso and report.equality and report.small == expected,
        f'supp M = {_names(report.small)}; ass J = {_names(report.ass_union)}',
    )


def bounded_minimal(s: Scenario, rng: random.Random) -> Outcome:
    report = check_minimal(tail_resolution(s.prime), s.window, s.samples, rng)
    return Outcome(report.minimal, report.failure)


def bounded_equivalence(s: Scenario, rng: random.Random) -> Outcome:
    reports = [
        check_support_equivalence(Concentrated(MModule(s.prime)), m, s.window, s.torsion_bound)
        for m in _support_primes(s.prime)
        if m.is_maximal
    ]
    bad = [r.describe() for r in reports if not r.agree]
    return Outcome(not bad, '; '.join(bad) or ', '.join(r.describe() for r in reports))


# ------------------------------- Running ------------------------------- #

SCENARIOS: dict[str, tuple[tuple[str, str, CheckFn], ...]] = {
    'prop-support': (
        ('three-way-equivalence', 'support-equivalence', three_way_equivalence),
        ('support-inclusion', 'support-inside-ass', support_inclusion),
        ('small-vs-big-support', 'small-support-of-emin', small_versus_big_support),
    ),
    'prop-main': (
        ('differential-squares-to-zero', 'counterexample-complex', differential_squares_to_zero),
        ('minimal', 'counterexample-minimal', minimal_resolution),
        ('quasi-isomorphism', 'counterexample-quasi-iso', resolution_quasi_iso),
        ('support-strictly-smaller', 'counterexample-strict-support', support_strictly_smaller),
        ('localized-acyclic', 'counterexample-localized-acyclic', localized_acyclic),
        ('localized-not-contractible', 'counterexample-not-contractible', localized_not_contractible),
        ('acyclicity-certificates', 'localized-exactness-certificate', localized_certificates),
        ('not-homotopically-injective', 'localized-not-homotopically-injective', homotopy_injectivity),
    ),
    'remark-ass': (
        ('left-inclusion', 'product-ass-left', product_ass_left),
        ('right-inclusion', 'product-ass-right', product_ass_right),
    ),
    'remark-ihulls': (
        ('unit-action', 'hull-unit-action', unit_action),
        ('power-torsion', 'hull-artinian', artinian_torsion),
        ('finite-length', 'hull-finite-length', finite_length),
        ('injective-support', 'hull-support-and-ass', injective_support),
    ),
    'foxby-bounded-below': (
        ('minimal', 'bounded-minimal', bounded_minimal),
        ('support-equals-ass', 'bounded-support-equals-ass', foxby_equality),
        ('three-way-equivalence', 'support-equivalence', bounded_equivalence),
    ),
}


def _run_check(s: Scenario, name: str, ref: str, fn: CheckFn) -> Check:
    rng = derive_rng(s.seed, f'{s.name}/{name}')
    start = time.perf_counter()
    try:
        result = fn(s, rng)
    except Exception as e:
        log.error('Check %s raised: %s', name, e)
        result = Outcome(False, f'{type(e).__name__}: {e}')
    elapsed = int((time.perf_counter() - start) * 1000)
    match result:
        case Skip(reason):
            status, witness = Status.SKIPPED, reason
        case Outcome(passed, witness):
            status = Status.PASS if passed else Status.FAIL
    if status is Status.FAIL:
        log.error('Check %s failed: %s', name, witness)
    else:
        log.info('Check %s: %s', name, status)
    return Check(name, ref, status, witness, elapsed)


@log_calls(level='debug', show_timing_only=True)
def run_scenario(s: Scenario) -> Report:
    log.info('Running %s at p=%d on window %d:%d', s.name, s.prime, *s.window)
    checks = tuple(_run_check(s, name, ref, fn) for name, ref, fn in SCENARIOS[s.name])
    report = Report(s, checks)
    log.info('Scenario %s: %s', s.name, report.overall)
    return report
