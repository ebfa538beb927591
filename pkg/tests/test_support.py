import pytest

from injres.complexes import (
    Concentrated,
    FiniteWindow,
    MapRule,
    XTail,
    shifted_copies,
    tail_product,
    tail_resolution,
)
from injres.errors import ShapeError, TrustWindowError, VerdictDisagreementError
from injres.modules import MModule, RationalModule, StdInjective
from injres.presented import FgModule
from injres.ring import PrimeIdeal, spec_enumerate
from injres.support import (
    EquivalenceReport,
    Evidence,
    big_support_set,
    check_support_equivalence,
    check_support_inclusion,
    decompose,
    free_resolution,
    local_cohomology_fg,
    require_agreement,
    residue_ext,
    residue_tor,
    small_support,
    support_set,
    term_ass,
)

MIN = PrimeIdeal.minimal_x()


def maximal(q):
    return PrimeIdeal.maximal_at(q)


# ---------------------------- Resolutions ---------------------------- #


def test_resolution_of_residue_field():
    res = free_resolution(FgModule.residue(2))
    assert res.ranks[:2] == (1, 2)
    assert res.is_exact()
    assert not res.terminates


def test_resolution_of_free_module_stops():
    res = free_resolution(FgModule.free(1))
    assert res.ranks == (1,)
    assert res.terminates
    assert res.is_exact()


def test_resolution_of_integers_is_periodic():
    res = free_resolution(FgModule.cyclic(MIN.ideal), 4)
    assert set(res.ranks) == {1}
    assert res.is_exact()
    with pytest.raises(ValueError):
        free_resolution(FgModule.free(1), 0)


def test_zero_module_has_empty_resolution():
    res = free_resolution(FgModule.zero())
    assert res.ranks == ()
    assert res.is_exact()


# --------------------------- Derived functors --------------------------- #


def test_tor_with_m_lives_in_degree_one():
    assert residue_tor(MModule(2), maximal(2), 0).is_zero()
    assert not residue_tor(MModule(2), maximal(2), 1).is_zero()
    assert all(residue_tor(MModule(2), maximal(3), d).is_zero() for d in range(4))
    assert all(residue_tor(MModule(2), MIN, d).is_zero() for d in range(4))


def test_tor_of_finitely_generated_modules():
    assert not residue_tor(FgModule.residue(2), maximal(2), 0).is_zero()
    assert residue_tor(FgModule.residue(2), maximal(3), 0).is_zero()
    assert residue_tor(FgModule.free(1), MIN, 0) == RationalModule(1)


def test_ext_from_residue_field():
    assert not residue_ext(FgModule.residue(3), maximal(3), 0).is_zero()
    assert residue_ext(FgModule.free(1), maximal(3), 0).is_zero()
    assert residue_ext(StdInjective.emax(3), maximal(3), 1).is_zero()
    assert not residue_ext(StdInjective.emax(3), maximal(3), 0).is_zero()


def test_trust_window():
    with pytest.raises(TrustWindowError):
        residue_tor(MModule(2), maximal(2), 7, 8)
    assert residue_tor(MModule(2), maximal(2), -1).is_zero()


def test_local_cohomology_of_finitely_generated_modules():
    torsion = local_cohomology_fg(FgModule.abelian([12]), maximal(2))
    assert torsion.h0 == (4,)
    assert not torsion.h1_nonzero
    assert torsion.describe() == 'H^0 = Z/4, H^1 = 0'
    free = local_cohomology_fg(FgModule.free(1), maximal(5))
    assert free.h0 == ()
    assert free.h1_nonzero
    assert not local_cohomology_fg(FgModule.abelian([9]), maximal(2)).nonzero


# ------------------------------ Supports ------------------------------ #


def test_decompose():
    m = decompose(Concentrated(MModule(2)), 'M')
    assert m.name == 'M'
    assert m.injective == XTail(StdInjective.emax(2), 0)
    assert m.resolution_map.rule is MapRule.IOTA
    x = decompose(shifted_copies(3))
    assert x.model == MModule(3)
    assert x.injective == tail_product(3)
    assert decompose(Concentrated(FgModule.free(1))).injective is None
    assert decompose(tail_resolution(5)).model == MModule(5)
    with pytest.raises(ShapeError):
        decompose(FiniteWindow(StdInjective.emax(2), 0, (1,)))


def test_small_support_of_emin_is_one_point():
    primes = spec_enumerate(5)
    reports = small_support(StdInjective.emin(), primes)
    assert support_set(reports) == [MIN]
    assert big_support_set(reports) == primes


def test_small_support_of_m():
    primes = spec_enumerate(5)
    assert support_set(small_support(MModule(3), primes)) == [maximal(3)]
    assert support_set(small_support(shifted_copies(3), primes)) == [maximal(3)]
    assert support_set(small_support(FgModule.free(1), primes)) == primes


def test_injective_hulls_are_supported_at_their_prime():
    primes = spec_enumerate(7)
    for prime in primes:
        assert support_set(small_support(StdInjective(prime), primes)) == [prime]


# ------------------------ Three-way equivalence ------------------------ #


@pytest.mark.parametrize(
    ('shape', 'q', 'expected'),
    [
        (Concentrated(MModule(2)), 2, True),
        (Concentrated(MModule(2)), 3, False),
        (Concentrated(FgModule.residue(3)), 3, True),
        (Concentrated(FgModule.free(1)), 2, True),
        (Concentrated(StdInjective.emin()), 2, False),
        (shifted_copies(2), 2, True),
    ],
)
def test_equivalence_agrees(shape, q, expected):
    report = check_support_equivalence(shape, maximal(q), (-2, 2))
    assert report.agree
    assert report.tensor.nonzero is expected


def test_equivalence_needs_a_maximal_prime():
    with pytest.raises(ValueError):
        check_support_equivalence(Concentrated(MModule(2)), MIN, (0, 1))


def test_require_agreement():
    yes, no = Evidence(True, 'yes'), Evidence(False, 'no')
    good = EquivalenceReport('M', maximal(2), yes, yes, yes)
    bad = EquivalenceReport('M', maximal(2), yes, no, yes)
    require_agreement([good])
    assert bad.describe() == 'M at (2,x): 1/0/1'
    with pytest.raises(VerdictDisagreementError):
        require_agreement([good, bad])


# ------------------------------ Inclusion ------------------------------ #


def test_inclusion_is_strict_for_products():
    primes = spec_enumerate(5)
    report = check_support_inclusion(shifted_copies(2), tail_product(2), primes, (-1, 1))
    assert report.quasi_iso
    assert report.small == (maximal(2),)
    assert report.ass_union == (MIN, maximal(2))
    assert report.holds
    assert not report.equality
    assert report.strict_witness.startswith('(x) in ass')


def test_inclusion_is_equality_for_bounded_below():
    primes = spec_enumerate(5)
    report = check_support_inclusion(Concentrated(MModule(3)), tail_resolution(3), primes, (0, 3))
    assert report.equality
    assert report.strict_witness is None
    with pytest.raises(ShapeError):
        check_support_inclusion(Concentrated(MModule(3)), tail_resolution(2), primes, (0, 3))


def test_term_ass():
    primes = spec_enumerate(5)
    assert term_ass(StdInjective.emax(2), primes) == {maximal(2): '(1/2^1, 0)'}
    assert set(term_ass(FgModule.abelian([6]), primes)) == {maximal(2), maximal(3)}
    assert term_ass(MModule(7), primes) == {}
