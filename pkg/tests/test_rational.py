import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfext.odeops import Polynomial, RationalFunction, parse_function

from conftest import assert_close

t = RationalFunction.variable()
points = st.tuples(st.integers(-3, 3), st.integers(-2, 2)).map(lambda p: complex(*p) / 2)


def test_common_factor_cancelled():
    f = RationalFunction(Polynomial.from_roots([1, 2]), Polynomial.from_roots([1, 3]))
    assert f.num.degree == 1 and f.den.degree == 1
    assert f.den.lead == 1
    assert f.allclose(RationalFunction(Polynomial([-2, 1]), Polynomial([-3, 1])))


def test_monic_denominator():
    f = RationalFunction(Polynomial([1]), Polynomial([2, 4]))
    assert f.den.lead == 1
    assert f(1) == pytest.approx(1 / 6)


def test_zero_denominator_rejected():
    with pytest.raises(ZeroDivisionError):
        RationalFunction(Polynomial([1]), Polynomial())


def test_arithmetic_and_evaluation():
    f = 1 / t + t / (t - 1)
    z = 0.3 + 0.4j
    assert f(z) == pytest.approx(1 / z + z / (z - 1))
    assert ((f - f)).is_zero()
    assert (f * f.inverse()).allclose(1)


def test_poles_and_zeros():
    f = parse_function("(t - 2)/(t^2 * (t + 1))")
    poles = sorted((round(z.real, 9), m) for z, m in f.poles())
    assert poles == [(-1.0, 1), (0.0, 2)]
    assert [round(z.real, 9) for z, _ in f.zeros()] == [2.0]
    assert f.valuation_at(0) == -2 and f.valuation_at(2) == 1 and f.valuation_at(5) == 0


def test_taylor_series():
    f = 1 / (1 - t)
    assert_close(f.taylor(0, 6), np.ones(6), 1e-14)
    g = 1 / t
    # 1/t around 1: sum (-1)^k (t - 1)^k
    assert_close(g.taylor(1, 5), [(-1) ** k for k in range(5)], 1e-14)


def test_laurent_series():
    v, c = (1 / (t**2 * (1 - t))).laurent(0, 4)
    assert v == -2
    assert_close(c, np.ones(4), 1e-14)


def test_reciprocal_substitution():
    f = t / (t - 2)
    g = f.reciprocal_substitution()
    s = 0.3 + 0.1j
    assert g(s) == pytest.approx(f(1 / s))


@given(points, points, st.integers(1, 3))
def test_derivative_of_power(a, b, k):
    f = (t - a) / (t - b) if a != b else t - a
    z = 2.5 + 1.5j
    h = 1e-6
    num = ((f**k)(z + h) - (f**k)(z - h)) / (2 * h)
    assert abs((f**k).derivative()(z) - num) < 1e-6 * max(1.0, abs(num))


@given(points, points, points)
def test_canonical_form_is_stable(a, b, c):
    # (t - a)(t - c) / ((t - b)(t - c)) reduces to (t - a)/(t - b) up to the cancelled factor
    if b == c or a == b:
        return
    f = RationalFunction(Polynomial.from_roots([a, c]), Polynomial.from_roots([b, c]))
    assert f.den.degree == 1
    assert f.allclose(RationalFunction(Polynomial.from_roots([a]), Polynomial.from_roots([b])))
