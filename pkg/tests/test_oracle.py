"""The exact engine against brute force over Z/p^k[x]/(x^2)."""

from fractions import Fraction

import pytest

from injres.errors import ModuleAxiomError, OracleSizeError
from injres.exactnum import IntMatrix, PruferElt
from injres.modules import EElt, StdInjective, ann_element, socle
from injres.oracle import (
    FiniteComplex,
    FiniteModule,
    Found,
    NoHomotopy,
    brute_ass,
    brute_essential,
    brute_hom,
    brute_homology,
    brute_homotopy,
    brute_socle,
    brute_tensor,
    evaluate_hom,
    ideal_from_lattice,
    is_prime_ideal,
    kernel_submodule,
    maximal_ideal,
)
from injres.presented import FgModule, ass_fg, fp_homology
from injres.ring import X_MATRIX, PrimeIdeal, RingElt
from injres.support import residue_tor

PRIMES = [2, 3]
X_ORACLE = ((0, 0), (1, 0))


def cyclic_group(n: int) -> FiniteModule:
    return FiniteModule((n,), ((0,),))


# ------------------------------ Sanity ------------------------------ #


def test_axioms():
    with pytest.raises(ModuleAxiomError):
        FiniteModule((2,), ((1,),))
    with pytest.raises(ModuleAxiomError):
        FiniteModule((4,), ((0,),), frozenset({(0,), (1,)}))
    with pytest.raises(OracleSizeError):
        FiniteModule((1000, 1001), ((0, 0), (0, 0)))


@pytest.mark.parametrize('p', PRIMES)
def test_prime_ideals_of_finite_rings(p):
    assert is_prime_ideal(maximal_ideal(p, p), p)
    assert is_prime_ideal(maximal_ideal(p, p**2), p**2)
    assert not is_prime_ideal(frozenset({(0, 0)}), p)
    assert not is_prime_ideal(frozenset((a, b) for a in range(p) for b in range(p)), p)


# --------------------------- Associated primes --------------------------- #


@pytest.mark.parametrize('p', PRIMES)
def test_ass_of_residue_field(p):
    assert brute_ass(FiniteModule.residue(p)) == {maximal_ideal(p, p)}
    assert ass_fg(FgModule.residue(p)) == {PrimeIdeal.maximal_at(p)}


@pytest.mark.parametrize('p', PRIMES)
def test_ass_of_cyclic_group(p):
    assert brute_ass(cyclic_group(p**2)) == {maximal_ideal(p, p**2)}
    assert ass_fg(FgModule.abelian([p**2])) == {PrimeIdeal.maximal_at(p)}


@pytest.mark.parametrize(('p', 'k'), [(2, 1), (2, 2), (3, 1)])
def test_ass_of_finite_ring_is_its_maximal_ideal(p, k):
    assert brute_ass(FiniteModule.ring(p, k)) == {maximal_ideal(p, p**k)}


@pytest.mark.parametrize(('p', 'k'), [(2, 1), (2, 2), (3, 1)])
def test_ass_of_injective_truncation(p, k):
    assert brute_ass(FiniteModule.injective_truncation(p, k)) == {maximal_ideal(p, p**k)}
    assert StdInjective.emax(p).associated_primes() == {PrimeIdeal.maximal_at(p)}


# ------------------------------ Annihilators ------------------------------ #


@pytest.mark.parametrize(('p', 'k'), [(2, 1), (2, 2), (3, 1)])
def test_annihilators_match_on_injective_truncation(p, k):
    m = FiniteModule.injective_truncation(p, k)
    n = p**k
    for u0, u1 in m.members:
        exact = ann_element(EElt(PruferElt(p, u0, k), PruferElt(p, u1, k)))
        expected = ideal_from_lattice(lambda a, b, exact=exact: RingElt(a, b) in exact, n)
        assert m.annihilator((u0, u1)) == expected


@pytest.mark.parametrize('p', PRIMES)
def test_annihilators_match_on_residue_field(p):
    m = FiniteModule.residue(p)
    exact = FgModule.residue(p).annihilator((1, 0))
    assert m.annihilator((1,)) == ideal_from_lattice(lambda a, b: RingElt(a, b) in exact, p)


# --------------------------------- Socles --------------------------------- #


@pytest.mark.parametrize('p', PRIMES)
def test_socle_of_injective_truncation(p):
    for k in (1, 2):
        assert brute_socle(FiniteModule.injective_truncation(p, k)).size == p
    assert socle(StdInjective.emax(p), PrimeIdeal.maximal_at(p)).size == p


@pytest.mark.parametrize('p', PRIMES)
def test_socle_of_abelian_group(p):
    m = FiniteModule((p, p**2), ((0, 0), (0, 0)))
    assert brute_socle(m).size == p**2
    assert FgModule.abelian([p, p**2]).socle_dimension(PrimeIdeal.maximal_at(p)) == 2


@pytest.mark.parametrize('p', PRIMES)
def test_x_kernel_of_ring(p):
    assert kernel_submodule(FiniteModule.ring(p)).size == p
    assert FgModule.free(1).socle_dimension(PrimeIdeal.minimal_x()) == 1


# ------------------------------ Essentiality ------------------------------ #


@pytest.mark.parametrize(('p', 'k'), [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_socle_is_essential_in_injective_truncation(p, k):
    m = FiniteModule.injective_truncation(p, k)
    assert brute_essential(brute_socle(m), m)


@pytest.mark.parametrize('p', PRIMES)
def test_socle_is_essential_in_ring(p):
    m = FiniteModule.ring(p)
    assert brute_essential(brute_socle(m), m)


@pytest.mark.parametrize('p', PRIMES)
def test_summand_is_not_essential(p):
    m = FiniteModule((p, p), ((0, 0), (0, 0)))
    summand = FiniteModule(m.moduli, m.x_action, frozenset((a, 0) for a in range(p)))
    assert not brute_essential(summand, m)


# -------------------------------- Homology -------------------------------- #


@pytest.mark.parametrize('p', PRIMES)
def test_multiplication_by_x_is_exact_in_the_middle(p):
    r = FiniteModule.ring(p)
    c = FiniteComplex(0, (r, r, r), (X_ORACLE, X_ORACLE))
    assert brute_homology(c, 1).size == 1
    assert brute_homology(c, 0).size == p
    assert brute_homology(c, 2).size == p
    zero = IntMatrix.zeros(2, 0)
    assert fp_homology(X_MATRIX, X_MATRIX, zero, zero, X_MATRIX).is_zero()
    assert fp_homology(X_MATRIX, None, zero, None, X_MATRIX).free_rank == 1


@pytest.mark.parametrize('p', PRIMES)
def test_homology_of_multiplication_by_p(p):
    r = FiniteModule.ring(p, 2)
    times_p = ((p, 0), (0, p))
    c = FiniteComplex(0, (r, r), (times_p,))
    assert brute_homology(c, 0).size == p**2
    assert brute_homology(c, 1).size == p**2


def test_complex_rejects_nonzero_square():
    r = FiniteModule.ring(2)
    identity = ((1, 0), (0, 1))
    with pytest.raises(ModuleAxiomError):
        FiniteComplex(0, (r, r, r), (identity, identity))


# ----------------------------------- Hom ----------------------------------- #


@pytest.mark.parametrize('p', PRIMES)
def test_hom_from_ring_is_the_module(p):
    assert brute_hom(FiniteModule.ring(p), FiniteModule.ring(p)).size == p**2
    assert brute_hom(FiniteModule.ring(p), FiniteModule.injective_truncation(p, 1)).size == p**2


@pytest.mark.parametrize('p', PRIMES)
def test_hom_from_residue_field_is_the_socle(p):
    k = FiniteModule.residue(p)
    for target in (FiniteModule.ring(p), FiniteModule.injective_truncation(p, 2)):
        assert brute_hom(k, target).size == brute_socle(target).size == p
    assert socle(StdInjective.emax(p), PrimeIdeal.maximal_at(p)).dimension == 1


@pytest.mark.parametrize('p', PRIMES)
def test_evaluate_hom(p):
    r = FiniteModule.ring(p)
    homs = brute_hom(r, r)
    for f in homs.members:
        image = evaluate_hom(f, r, r, (1, 0))
        assert evaluate_hom(f, r, r, (0, 1)) == r.x_act(image)


# --------------------------------- Tensor --------------------------------- #


@pytest.mark.parametrize('p', PRIMES)
def test_tensor_with_residue_field(p):
    k = FiniteModule.residue(p)
    assert brute_tensor(k, FiniteModule.ring(p)).size == p
    assert brute_tensor(k, k).size == p
    exact = residue_tor(FgModule.residue(p), PrimeIdeal.maximal_at(p), 0)
    assert exact.torsion_orders == (p,)


@pytest.mark.parametrize('p', PRIMES)
def test_ring_tensor_ring(p):
    r = FiniteModule.ring(p)
    assert brute_tensor(r, r).size == p**2


@pytest.mark.parametrize('p', PRIMES)
def test_tensor_of_coprime_groups_vanishes(p):
    q = 5
    assert brute_tensor(cyclic_group(p), cyclic_group(q)).size == 1
    assert residue_tor(FgModule.residue(p), PrimeIdeal.maximal_at(q), 0).is_zero()


# -------------------------------- Homotopy -------------------------------- #


@pytest.mark.parametrize('p', PRIMES)
def test_multiplication_by_x_has_no_contraction(p):
    r = FiniteModule.ring(p)
    verdict = brute_homotopy(FiniteComplex(0, (r, r), (X_ORACLE,)))
    assert isinstance(verdict, NoHomotopy)
    assert verdict.searched == p**2


@pytest.mark.parametrize('p', PRIMES)
def test_identity_complex_is_contractible(p):
    r = FiniteModule.ring(p)
    verdict = brute_homotopy(FiniteComplex(0, (r, r), (((1, 0), (0, 1)),)))
    assert isinstance(verdict, Found)
    assert verdict.homotopy[1] == (1, 0, 0, 1)


@pytest.mark.parametrize('p', PRIMES)
def test_exempt_degrees(p):
    r = FiniteModule.ring(p)
    c = FiniteComplex(0, (r, r), (X_ORACLE,))
    assert isinstance(brute_homotopy(c, exempt=(0, 1)), Found)
    assert brute_homotopy(c, exempt=(0,)) == NoHomotopy(p**2, (0,))


def test_x_action_on_injective_truncation():
    m = FiniteModule.injective_truncation(2, 1)
    assert m.size == 4
    half = EElt.of(2, Fraction(1, 2), Fraction(1, 2))
    assert m.x_act((1, 1)) == (1, 0)
    assert half.x_act() == EElt.of(2, Fraction(1, 2))
