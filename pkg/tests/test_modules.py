from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from injres.exactnum import PruferElt
from injres.modules import (
    ArtinianModule,
    EElt,
    EMinElt,
    Finite,
    Infinite,
    MModule,
    RationalModule,
    StdInjective,
    ZeroModule,
    ann_element,
    big_support,
    length_over_localization,
    matlis_dual_homology,
    same_descriptor,
    scalar_act,
    socle,
    unit_action_is_bijective,
    unit_action_method,
    x_act,
)
from injres.presented import FgModule
from injres.ring import Ideal, PrimeIdeal, RingElt, RMatrix, spec_enumerate


def test_x_action():
    assert EElt.of(2, Fraction(1, 2), Fraction(1, 4)).x_act() == EElt.of(2, Fraction(1, 4))
    assert EElt.of(2, Fraction(1, 2)).x_act().is_zero()
    assert EMinElt(1, 3).x_act() == EMinElt(0, 1)
    assert x_act(PruferElt(3, 1, 2)) == PruferElt(3)


def test_scalar_action():
    e = EElt.of(2, Fraction(1, 4), Fraction(1, 8))
    assert scalar_act(RingElt(2), e) == EElt.of(2, Fraction(1, 2), Fraction(1, 4))
    assert scalar_act(RingElt.x(), e) == e.x_act()
    assert scalar_act(RingElt(3), EElt.of(2, Fraction(1, 2))) == EElt.of(2, Fraction(1, 2))
    assert scalar_act(RingElt(2, 1), EMinElt(1, 1)) == EMinElt(2, 3)


@pytest.mark.parametrize('p', [2, 3, 5, 7])
def test_socle_generator_realizes_the_prime(p):
    emax = StdInjective.emax(p)
    assert ann_element(emax.socle_generator()) == PrimeIdeal.maximal_at(p).ideal
    assert emax.associated_primes() == {PrimeIdeal.maximal_at(p)}


def test_annihilators():
    assert ann_element(EElt.zero(2)).is_unit_ideal()
    ann = ann_element(EElt.of(2, Fraction(1, 4), Fraction(1, 2)))
    assert RingElt(2, 1) in ann
    assert RingElt(4) in ann
    assert RingElt(2) not in ann
    assert ann_element(EMinElt(0, 5)) == PrimeIdeal.minimal_x().ideal
    assert ann_element(EMinElt(1, 0)).is_zero()
    assert ann_element(PruferElt(3, 1, 2)) == Ideal.generated(RingElt(9), RingElt.x())


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from([2, 3]),
    st.integers(0, 3),
    st.integers(0, 200),
    st.integers(0, 3),
    st.integers(0, 200),
)
def test_annihilator_matches_action(p, k0, u0, k1, u1):
    e = EElt(PruferElt(p, u0, k0), PruferElt(p, u1, k1))
    ann = ann_element(e)
    for a in range(-p**2, p**3 + 1):
        for b in range(-p, p**2 + 1):
            r = RingElt(a, b)
            assert (r in ann) == scalar_act(r, e).is_zero()


def test_nilpotency_index():
    assert EElt.of(2, Fraction(1, 2)).nilpotency_index() == 1
    assert EElt.of(2, 0, Fraction(1, 2)).nilpotency_index() == 2
    assert EElt.of(3, Fraction(1, 9), Fraction(1, 3)).nilpotency_index() == 2
    assert EElt.zero(5).nilpotency_index() == 0


def test_supports_of_standard_injectives():
    primes = spec_enumerate(7)
    emin, emax = StdInjective.emin(), StdInjective.emax(3)
    assert big_support(emin, primes) == primes
    assert big_support(emax, primes) == [PrimeIdeal.maximal_at(3)]
    assert big_support(MModule(5), primes) == [PrimeIdeal.maximal_at(5)]
    assert big_support(ZeroModule(), primes) == []


def test_socles():
    s = socle(StdInjective.emax(2), PrimeIdeal.maximal_at(2))
    assert (s.dimension, s.size) == (1, 2)
    assert s.generators == (EElt.of(2, Fraction(1, 2)),)
    s = socle(StdInjective.emin(), PrimeIdeal.minimal_x())
    assert s.generators == (EMinElt(0, 1),)
    assert socle(ZeroModule(), PrimeIdeal.maximal_at(3)).is_zero()
    assert socle(StdInjective.emax(2), PrimeIdeal.maximal_at(3)).is_zero()


def test_length_over_localization():
    assert length_over_localization(StdInjective.emin()) == Finite(2)
    verdict = length_over_localization(StdInjective.emax(2))
    assert isinstance(verdict, Infinite)
    assert verdict.chain == tuple(EElt.of(2, Fraction(1, 2**k)) for k in (1, 2, 3))
    assert verdict.orders == (2, 4, 8)
    assert isinstance(length_over_localization(StdInjective.emax(7)), Infinite)


def test_unit_action():
    emax = StdInjective.emax(2)
    assert unit_action_is_bijective(emax, RingElt(3, 1), 3)
    assert unit_action_is_bijective(emax, RingElt(5, 2), 4)
    assert not unit_action_is_bijective(emax, RingElt(2), 3)
    assert not unit_action_is_bijective(emax, RingElt.x(), 3)
    # 3^16 elements: decided on the lattice instead of by enumeration
    e3 = StdInjective.emax(3)
    assert unit_action_is_bijective(e3, RingElt(2, 1), 8)
    assert not unit_action_is_bijective(e3, RingElt(3, 1), 8)
    assert unit_action_is_bijective(MModule(3), RingElt(2), 2)
    assert not unit_action_is_bijective(StdInjective.emin(), RingElt.x(), 1)


def test_unit_action_method_switches_at_the_enumeration_limit():
    assert unit_action_method(StdInjective.emax(2), 8) == 'enumeration'
    assert unit_action_method(StdInjective.emax(2), 9) == 'lattice'
    assert unit_action_method(StdInjective.emax(3), 5) == 'enumeration'
    assert unit_action_method(StdInjective.emax(3), 6) == 'lattice'
    assert unit_action_method(MModule(3), 20) == 'formula'
    assert unit_action_method(StdInjective.emin(), 1) == 'formula'


def test_matlis_dual_homology_of_truncated_tail():
    emax = StdInjective.emax(2)
    x = RMatrix.from_rows([[(0, 1)]])
    ranks = {0: 1, 1: 1, 2: 1}
    diffs = {0: x, 1: x}
    assert matlis_dual_homology(emax, ranks, diffs, 0) == MModule(2)
    assert matlis_dual_homology(emax, ranks, diffs, 1).is_zero()
    assert matlis_dual_homology(emax, ranks, diffs, 5).is_zero()


def test_matlis_dual_homology_with_zero_differential():
    emax = StdInjective.emax(3)
    h = matlis_dual_homology(emax, {0: 1, 1: 1}, {0: RMatrix.zeros(1, 1)}, 1)
    assert h == emax


def test_matlis_dual_homology_over_emin():
    emin = StdInjective.emin()
    h = matlis_dual_homology(emin, {0: 1, 1: 1}, {0: RMatrix.identity(1)}, 0)
    assert h.is_zero()
    h = matlis_dual_homology(emin, {0: 1, 1: 1}, {0: RMatrix.zeros(1, 1)}, 0)
    assert h == RationalModule(2)


def test_artinian_descriptions():
    torsion = ArtinianModule(2, FgModule.abelian([4]))
    assert torsion.describe() == 'Z/4'
    assert not torsion.is_zero()
    assert ArtinianModule(3, FgModule.abelian([4])).is_zero()
    assert same_descriptor(ArtinianModule(2, FgModule.abelian([0])), MModule(2))
