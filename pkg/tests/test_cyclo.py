import cmath
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnus.cyclo import CycloInt, CycloRat, galois, is_unit, norm, p_over_pi, pi_element

PRIMES = [3, 5, 7]


def as_complex(a, k=1):
    z = cmath.exp(2j * cmath.pi * k / a.p)
    return sum(complex(c) * z**j for j, c in enumerate(a.coeffs))


def cyclo_ints(p, lo=-6, hi=6):
    return st.lists(st.integers(lo, hi), min_size=p - 1, max_size=p - 1).map(lambda c: CycloInt(p, c))


@st.composite
def pair_same_p(draw):
    p = draw(st.sampled_from(PRIMES))
    return draw(cyclo_ints(p)), draw(cyclo_ints(p))


def test_omega_squared():
    w = CycloInt(3, (0, 1))
    assert w * w == CycloInt(3, (-1, -1))


def test_pi_squared_is_minus_three_omega():
    pi = pi_element(3)
    assert pi * pi == CycloInt(3, (0, -3))
    assert norm(pi) == 3


@pytest.mark.parametrize("p", PRIMES)
def test_p_over_pi(p):
    assert p_over_pi(p) * pi_element(p) == p


def test_p_over_pi_eisenstein():
    assert p_over_pi(3) == CycloInt(3, (-2, -1))


def test_one_plus_zeta_is_unit():
    a = CycloInt(5, (1, 1))
    assert norm(a) == 1 and is_unit(a)
    assert a * a.inverse() == 1


def test_zeta_times_zeta4():
    z = CycloInt.zeta_power(5, 1)
    assert z * CycloInt.zeta_power(5, 4) == 1


def test_inverse_of_pi():
    inv = pi_element(3).inverse()
    assert inv == CycloRat(3, (Fraction(-2, 3), Fraction(-1, 3)))
    assert not inv.is_integral()


def test_integral_round_trip():
    assert CycloRat(5, (2, 0, -1, 3)).to_int() == CycloInt(5, (2, 0, -1, 3))
    with pytest.raises(ValueError):
        CycloRat(5, (Fraction(1, 2),)).to_int()


def test_unsupported_prime():
    with pytest.raises(ValueError):
        CycloInt(4, (1,))


def test_mixed_primes_rejected():
    with pytest.raises(ValueError):
        CycloInt(3, (1,)) + CycloInt(5, (1,))


@given(pair_same_p())
def test_product_matches_complex_evaluation(ab):
    a, b = ab
    assert abs(as_complex(a * b) - as_complex(a) * as_complex(b)) < 1e-6
    assert abs(as_complex(a + b) - (as_complex(a) + as_complex(b))) < 1e-9


@given(pair_same_p())
def test_norm_is_multiplicative(ab):
    a, b = ab
    assert norm(a * b) == norm(a) * norm(b)


@given(st.sampled_from(PRIMES).flatmap(cyclo_ints))
def test_norm_matches_complex_product(a):
    prod = 1
    for k in range(1, a.p):
        prod *= as_complex(a, k)
    assert abs(prod - norm(a)) < 1e-6 * max(1, abs(norm(a)))


@given(st.sampled_from(PRIMES).flatmap(cyclo_ints), st.integers(1, 6))
def test_galois_matches_evaluation_at_power(a, k):
    if k % a.p == 0:
        return
    assert abs(as_complex(galois(a, k)) - as_complex(a, k)) < 1e-6


@given(st.sampled_from(PRIMES).flatmap(cyclo_ints))
def test_inverse(a):
    if not a:
        with pytest.raises(ZeroDivisionError):
            a.inverse()
        return
    assert a * a.inverse() == 1
    assert (a.inverse().is_integral()) == is_unit(a)


def test_int_compatibility():
    assert CycloInt(3, (2,)) == 2
    assert hash(CycloInt(3, (2,))) == hash(2)
    assert CycloInt(3, (0, 1)) != 1
