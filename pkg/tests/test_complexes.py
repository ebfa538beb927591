import random
from fractions import Fraction

import pytest

from injres.complexes import (
    ChainMap,
    Concentrated,
    Contractible,
    FiniteWindow,
    Localized,
    MapRule,
    NotContractible,
    ProductOfShifts,
    XTail,
    acyclicity_certificate,
    check_commutes,
    check_d_squared,
    check_minimal,
    check_quasi_iso,
    cohomology_at,
    contractibility_verdict,
    differential,
    gamma_torsion,
    hom_from_residue,
    is_acyclic,
    is_zero_complex,
    localize_complex,
    localized_nonzero,
    not_homotopically_injective_witness,
    shift,
    shifted_copies,
    special_elements,
    tail_product,
    tail_resolution,
    term_at,
)
from injres.errors import IncompatibleShapesError, ShapeError
from injres.modules import EElt, EMinElt, MModule, StdInjective, ZeroModule
from injres.products import ProductModule
from injres.ring import PrimeIdeal, RingElt, RMatrix

E2 = StdInjective.emax(2)
X = RMatrix.from_rows([[(0, 1)]])
ONE = RMatrix.identity(1)
MIN = PrimeIdeal.minimal_x()
MAX2 = PrimeIdeal.maximal_at(2)


@pytest.fixture
def rng():
    return random.Random(0)


# ------------------------------- Shapes ------------------------------- #


@pytest.mark.parametrize(
    'c',
    [
        tail_resolution(2),
        Concentrated(MModule(3), 1),
        FiniteWindow(E2, 0, (1, 1, 1), (X, X)),
    ],
)
@pytest.mark.parametrize('i', [-1, 1, 2])
def test_shift_moves_terms(c, i):
    for n in range(-4, 5):
        assert term_at(shift(c, i), n) == term_at(c, n + i)


def test_shift_flips_the_differential_sign():
    c = shift(tail_resolution(2), 1)
    assert c == XTail(E2, -1, -1)
    e = EElt.of(2, 0, Fraction(1, 4))
    assert differential(c, -1, e) == -EElt.of(2, Fraction(1, 4))


def test_shape_errors():
    with pytest.raises(ShapeError):
        FiniteWindow(E2, 0, (1, 1, 1), (ONE, ONE))
    with pytest.raises(ShapeError):
        FiniteWindow(E2, 0, (1, 2), (X,))
    with pytest.raises(ShapeError):
        ProductOfShifts(XTail(StdInjective.emin()))
    with pytest.raises(ShapeError):
        term_at(object(), 0)


def test_product_terms():
    c = tail_product(2)
    assert term_at(c, 0) == ProductModule(E2, 0)
    assert term_at(c, 3) == ProductModule(E2, -3)
    assert term_at(shifted_copies(5), 7) == MModule(5)
    assert is_zero_complex(Concentrated(ZeroModule()), (0, 3))
    assert not is_zero_complex(c, (0, 0))


# ----------------------------- Cohomology ----------------------------- #


def test_tail_resolves_m():
    c = tail_resolution(2)
    assert cohomology_at(c, 0) == MModule(2)
    assert cohomology_at(c, -1).is_zero()
    assert all(cohomology_at(c, n).is_zero() for n in range(1, 5))
    assert is_acyclic(c, (1, 4))
    assert not is_acyclic(c, (0, 2))


def test_product_cohomology_is_m_in_every_degree():
    c = tail_product(3)
    for n in range(-2, 3):
        assert cohomology_at(c, n) == MModule(3)
        assert cohomology_at(shifted_copies(3), n) == MModule(3)


def test_localized_product_is_acyclic():
    loc = localize_complex(tail_product(2), MIN)
    assert isinstance(loc, Localized)
    assert not term_at(loc, 0).is_zero()
    assert is_acyclic(loc, (-3, 3))
    assert not is_acyclic(localize_complex(tail_product(2), MAX2), (0, 0))


@pytest.mark.parametrize('c', [tail_resolution(2), tail_product(2), tail_product(3)])
def test_d_squared(c, rng):
    report = check_d_squared(c, (-2, 2), 10, rng)
    assert report.ok
    assert report.sampled > 0


def test_special_elements_of_a_window():
    fw = FiniteWindow(E2, 0, (2,))
    gens = special_elements(fw, 0)
    assert len(gens) == 2
    assert gens[0] == (E2.socle_generator(), EElt.zero(2))


def test_localized_nonzero():
    assert not localized_nonzero(EElt.of(2, Fraction(1, 2)), MIN)
    assert localized_nonzero(EElt.of(2, Fraction(1, 2)), MAX2)
    assert localized_nonzero(EMinElt(1), PrimeIdeal.maximal_at(3))
    assert not localized_nonzero(None, MIN)


# ----------------------------- Chain maps ----------------------------- #


def test_inclusion_of_m_is_a_quasi_isomorphism(rng):
    f = ChainMap(Concentrated(MModule(2), 0), tail_resolution(2), MapRule.IOTA)
    report = check_quasi_iso(f, (-1, 3))
    assert report.iso
    assert [d.degree for d in report.degrees] == [-1, 0, 1, 2, 3]
    assert check_commutes(f, (0, 2), 10, rng).ok


def test_inclusion_into_product(rng):
    f = ChainMap(shifted_copies(2), tail_product(2), MapRule.IOTA)
    assert check_quasi_iso(f, (-1, 1)).iso
    assert check_commutes(f, (-1, 1), 10, rng).ok


def test_chain_map_validation():
    with pytest.raises(IncompatibleShapesError):
        ChainMap(Concentrated(MModule(3), 0), tail_resolution(2), MapRule.IOTA)
    with pytest.raises(IncompatibleShapesError):
        ChainMap(tail_resolution(2), tail_resolution(3), MapRule.IDENTITY)
    with pytest.raises(IncompatibleShapesError):
        ChainMap(tail_resolution(2), FiniteWindow(E2, 0, (1,)), MapRule.MATRIX)


def test_matrix_maps():
    fw = FiniteWindow(E2, 0, (1, 1), (X,))
    identity = ChainMap(fw, fw, MapRule.MATRIX, ((0, ONE), (1, ONE)))
    assert check_quasi_iso(identity, (0, 0)).iso
    zero = ChainMap(fw, fw, MapRule.MATRIX)
    assert not check_quasi_iso(zero, (0, 0)).iso
    assert check_quasi_iso(ChainMap(fw, fw, MapRule.IDENTITY), (0, 1)).iso


# ----------------------------- Minimality ----------------------------- #


def test_x_tail_is_minimal(rng):
    report = check_minimal(tail_resolution(2), (0, 3), 10, rng)
    assert report.minimal
    assert report.failure is None
    assert check_minimal(tail_product(2), (-2, 2), 10, rng).minimal


def test_window_minimality(rng):
    assert check_minimal(FiniteWindow(E2, 0, (1, 1), (X,)), (0, 1), 10, rng).minimal
    report = check_minimal(FiniteWindow(E2, 0, (1, 1), (ONE,)), (0, 1), 10, rng)
    assert not report.minimal
    assert report.failure.startswith('degree 0')


def test_localized_product_stays_minimal(rng):
    loc = localize_complex(tail_product(2), MIN)
    assert check_minimal(loc, (-2, 2), 10, rng).minimal


# ------------------------- Torsion and residues ------------------------- #


def test_gamma_torsion_at_the_matching_prime():
    report = gamma_torsion(tail_product(2), MAX2, (-2, 2), 12)
    assert report.nonzero_degrees == (-2, -1, 0, 1, 2)
    assert report.cohomology_nonzero
    assert report.witness.startswith('degree -2')


def test_gamma_torsion_at_another_prime():
    report = gamma_torsion(tail_resolution(2), PrimeIdeal.maximal_at(3), (0, 0), 12)
    assert not report.nonzero
    assert not report.cohomology_nonzero
    assert '3 acts bijectively' in report.certificate
    with pytest.raises(ValueError):
        gamma_torsion(tail_product(2), MIN, (0, 0), 12)


def test_hom_from_residue():
    report = hom_from_residue(tail_resolution(2), MAX2, (0, 3))
    assert report.differential_vanishes
    assert report.cohomology_nonzero
    assert [n for n, _ in report.socle_terms] == [0, 1, 2, 3]
    split = hom_from_residue(FiniteWindow(E2, 0, (1, 1), (ONE,)), MAX2, (0, 1))
    assert not split.differential_vanishes
    assert not split.cohomology_nonzero
    other = hom_from_residue(tail_resolution(2), PrimeIdeal.maximal_at(5), (0, 3))
    assert other.socle_terms == ()


def test_hom_from_residue_of_localized_product():
    loc = localize_complex(tail_product(2), MIN)
    report = hom_from_residue(loc, MIN, (-1, 1))
    assert report.differential_vanishes
    assert report.cohomology_nonzero


# ------------------------ Localization certificates ------------------------ #


def test_acyclicity_certificate():
    loc = localize_complex(tail_product(2), MIN)
    term = term_at(loc.inner, 0)
    z = term.geometric(0, 1, 1 - term.start)
    cert = acyclicity_certificate(loc, 0, z)
    assert cert.unit == RingElt(2)
    assert not MIN.contains(cert.unit)
    assert differential(loc.inner, -1, cert.preimage) == z.scalar_act(cert.unit)


def test_acyclicity_certificate_rejects_bad_input():
    loc = localize_complex(tail_product(2), MIN)
    term = term_at(loc.inner, 0)
    with pytest.raises(ValueError):
        acyclicity_certificate(loc, 0, term.geometric(1, 1, 1 - term.start))
    at_max = localize_complex(tail_product(2), MAX2)
    with pytest.raises(ValueError):
        acyclicity_certificate(at_max, 0, term.geometric(0, 1, 1 - term.start))
    with pytest.raises(ShapeError):
        acyclicity_certificate(localize_complex(tail_resolution(2), MIN), 0, term.zero())


def test_not_homotopically_injective_witness():
    loc = localize_complex(tail_product(2), MIN)
    witness = not_homotopically_injective_witness(loc, 0)
    assert witness.acyclic
    assert witness.element.annihilator() == MIN.ideal


# --------------------------- Contractibility --------------------------- #


def test_split_window_is_contractible(rng):
    verdict = contractibility_verdict(FiniteWindow(E2, 0, (1, 1), (ONE,)), (0, 1), 5, rng)
    assert isinstance(verdict, Contractible)
    assert dict(verdict.homotopy)[1] == ONE
    assert isinstance(contractibility_verdict(Concentrated(ZeroModule()), (0, 1)), Contractible)


def test_minimal_complexes_are_not_contractible(rng):
    assert isinstance(contractibility_verdict(tail_resolution(2), (0, 3), 5, rng), NotContractible)
    fw = FiniteWindow(E2, 0, (1, 1), (X,))
    assert isinstance(contractibility_verdict(fw, (0, 1), 5, rng), NotContractible)


def test_localized_product_is_acyclic_but_not_contractible(rng):
    loc = localize_complex(tail_product(2), MIN)
    verdict = contractibility_verdict(loc, (-2, 2), 5, rng)
    assert isinstance(verdict, NotContractible)
    assert verdict.reason.startswith('minimal complex of injectives')


def test_localization_at_the_maximal_prime_stays_minimal(rng):
    loc = localize_complex(tail_product(2), MAX2)
    verdict = contractibility_verdict(loc, (-1, 1), 5, rng)
    assert isinstance(verdict, NotContractible)
    assert verdict.reason.startswith('minimal complex of injectives')
