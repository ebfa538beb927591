from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from injres.errors import BaseRingMismatchError, UnsupportedDifferentialError
from injres.exactnum import IntMatrix
from injres.ring import (
    QQ,
    X_MATRIX,
    BaseRing,
    Ideal,
    Localization,
    PrimeIdeal,
    RingElt,
    RMatrix,
    annihilator_of_element,
    residue_field,
    spec_enumerate,
)

small = st.integers(-30, 30)
elements = st.builds(RingElt, small, small)


@given(elements, elements, elements)
def test_ring_laws(r, s, t):
    assert r * s == s * r
    assert (r * s) * t == r * (s * t)
    assert r * (s + t) == r * s + r * t
    assert r + (-r) == RingElt(0)


def test_multiplication_kills_x_squared():
    x = RingElt.x()
    assert (x * x).is_zero()
    assert RingElt(1, 2) * RingElt(3, 4) == RingElt(3, 10)


def test_base_mismatch():
    with pytest.raises(BaseRingMismatchError):
        RingElt(1) + RingElt(1, 0, QQ)


def test_finite_field_base_normalizes():
    f3 = BaseRing.finite_field(3)
    assert RingElt(5, 0, f3).a == 2
    assert RingElt(Fraction(1, 2), 0, f3).a == 2
    with pytest.raises(ValueError):
        RingElt(Fraction(1, 3), 0, f3)
    with pytest.raises(ValueError):
        RingElt(Fraction(1, 2))


def test_ideal_membership():
    m = Ideal.generated(RingElt(2), RingElt.x())
    assert RingElt(4, 3) in m
    assert RingElt(1, 1) not in m
    assert m == PrimeIdeal.maximal_at(2).ideal
    assert Ideal.generated(RingElt.x()).issubset(m)
    assert not m.issubset(Ideal.generated(RingElt.x()))


def test_ideal_of_unit_and_power():
    assert Ideal.generated(RingElt(1, 5)).is_unit_ideal()
    m = PrimeIdeal.maximal_at(3).ideal
    m2 = m.power(2)
    assert RingElt(9) in m2
    assert RingElt(0, 3) in m2
    assert RingElt(0, 1) not in m2
    assert RingElt(3) not in m2


def test_ideal_over_rationals():
    x = Ideal.generated(RingElt.x(QQ))
    assert RingElt(0, Fraction(7, 3), QQ) in x
    assert RingElt(1, 0, QQ) not in x


def test_annihilators_of_ring_elements():
    assert annihilator_of_element(RingElt.x()) == Ideal.generated(RingElt.x())
    assert annihilator_of_element(RingElt(2)).is_zero()
    assert annihilator_of_element(RingElt(0, 6)) == Ideal.generated(RingElt.x())


def test_prime_ideals():
    x, m2 = PrimeIdeal.minimal_x(), PrimeIdeal.maximal_at(2)
    assert str(x) == '(x)' and str(m2) == '(2,x)'
    assert x.contained_in(m2)
    assert not m2.contained_in(x)
    assert not m2.contained_in(PrimeIdeal.maximal_at(3))
    assert m2.contains(RingElt(6, 1))
    assert not x.contains(RingElt(6, 1))
    with pytest.raises(ValueError):
        PrimeIdeal.maximal_at(4)


def test_spec_enumerate():
    primes = spec_enumerate(11)
    assert [str(p) for p in primes] == ['(x)', '(2,x)', '(3,x)', '(5,x)', '(7,x)', '(11,x)']
    assert sorted(primes, key=lambda p: p.sort_key) == primes


def test_residue_fields_and_localization():
    assert residue_field(PrimeIdeal.maximal_at(5)) == BaseRing.finite_field(5)
    assert residue_field(PrimeIdeal.minimal_x()) == QQ
    at2 = Localization(PrimeIdeal.maximal_at(2))
    assert at2.is_unit(RingElt(3, 1))
    assert not at2.is_unit(RingElt(2))
    atx = Localization(PrimeIdeal.minimal_x())
    assert atx.is_unit(RingElt(2))
    assert atx.is_zero_divisor(RingElt(0, 1))
    assert atx.base == QQ


def test_rmatrix_operations():
    d = RMatrix.from_rows([[(0, 1), 2], [1, RingElt.x()]])
    assert RMatrix.identity(2) @ d == d
    assert d.transpose()[0, 1] == RingElt(1)
    assert (RMatrix.from_rows([[(0, 1)]]) @ RMatrix.from_rows([[(0, 1)]])).is_zero()
    assert RMatrix.from_rows([[RingElt.x()]]).expand() == X_MATRIX
    assert RMatrix.from_rows([[(3, 1)]]).expand() == IntMatrix.from_rows([[3, 0], [1, 3]])
    assert d.a_part() == IntMatrix.from_rows([[0, 2], [1, 0]])


def test_rmatrix_rejects_non_integral_entries():
    with pytest.raises(UnsupportedDifferentialError):
        RMatrix.from_rows([[Fraction(1, 2)]])
