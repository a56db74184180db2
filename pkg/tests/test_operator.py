from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfext.errors import AllCoefficientsZero, ParseError, ZeroFunction
from pfext.odeops import (
    DifferentialOperator,
    Polynomial,
    RationalFunction,
    compose,
    dlog,
    normalize,
    parse_function,
    parse_number,
    parse_operator,
    pullback_to_infinity,
    singularities,
)

t = RationalFunction.variable()
D = DifferentialOperator.derivation()

coef = st.lists(st.integers(-3, 3).map(lambda k: k / 2), min_size=1, max_size=3).map(
    lambda cs: RationalFunction(Polynomial(cs))
)


@st.composite
def operators(draw, max_order=2):
    n = draw(st.integers(0, max_order))
    cs = [draw(coef) for _ in range(n)]
    lead = draw(coef)
    if lead.is_zero():
        lead = RationalFunction.coerce(1)
    return DifferentialOperator(cs + [lead])


# normalize


def test_normalize_examples():
    op = normalize([0, t])
    assert op.order == 1 and op.coeffs[1].allclose(t) and op.coeffs[0].is_zero()
    op = normalize([t, t**2])
    assert op.coeffs[0].allclose(1) and op.coeffs[1].allclose(t)
    op = normalize([1, 0])
    assert op.order == 0
    with pytest.raises(ValueError):
        singularities(op)


def test_normalize_clears_denominators():
    op = normalize([1 / t, 1 / (t * (t - 1)), 2])
    assert all(c.is_polynomial() for c in op.coeffs)
    assert op.allclose(DifferentialOperator([1 / t, 1 / (t * (t - 1)), 2]), up_to_unit=True)
    assert op.leading.num.lead == pytest.approx(1)


def test_normalize_errors():
    with pytest.raises(AllCoefficientsZero):
        normalize([0, 0])
    with pytest.raises(ValueError):
        normalize([])


# compose


def test_compose_examples():
    assert compose(D, D).allclose(DifferentialOperator([0, 0, 1]))
    assert compose(D, DifferentialOperator([t])).allclose(DifferentialOperator([1, t]))
    left = DifferentialOperator([1 / t, 1])
    assert compose(left, D).allclose(DifferentialOperator([0, 1 / t, 1]))


@given(operators(), operators(), operators())
def test_compose_associative(a, b, c):
    lhs = compose(compose(a, b), c)
    rhs = compose(a, compose(b, c))
    assert lhs.order == rhs.order
    assert lhs.allclose(rhs, rtol=1e-9)


@given(operators(), operators())
def test_compose_order_additive(a, b):
    assert compose(a, b).order == a.order + b.order


@given(operators(), st.lists(st.integers(-3, 3), min_size=1, max_size=3))
def test_compose_matches_application(op, f_coeffs):
    f = RationalFunction(Polynomial(f_coeffs))
    inner = DifferentialOperator([1, t])
    lhs = compose(op, inner).apply(f)
    rhs = op.apply(inner.apply(f))
    assert lhs.allclose(rhs, rtol=1e-9) or (lhs - rhs).num.norm() < 1e-9


# dlog


def test_dlog_examples():
    assert dlog(t).allclose(1 / t)
    assert dlog(RationalFunction.coerce(3)).is_zero()
    assert dlog(t**2 - 1).allclose(2 * t / (t**2 - 1))
    with pytest.raises(ZeroFunction):
        dlog(RationalFunction())


nonzero_rational = st.tuples(
    st.lists(st.integers(-2, 2).map(lambda k: k + 0.5), min_size=1, max_size=3),
    st.lists(st.integers(-2, 2).map(lambda k: k + 0.5), min_size=1, max_size=3),
).map(lambda p: RationalFunction(Polynomial(p[0]), Polynomial(p[1])))


@given(nonzero_rational, nonzero_rational)
def test_dlog_multiplicative(f, g):
    assert dlog(f * g).allclose(dlog(f) + dlog(g), rtol=1e-8)


# pullback


def test_pullback_examples():
    s = RationalFunction.variable()
    assert pullback_to_infinity(D).allclose(DifferentialOperator([0, -(s**2)]))
    assert pullback_to_infinity(DifferentialOperator([0, t])).allclose(DifferentialOperator([0, -s]))


@given(operators())
def test_double_pullback_returns_operator(op):
    if op.order < 1:
        return
    twice = pullback_to_infinity(pullback_to_infinity(op))
    assert twice.allclose(op, up_to_unit=True, rtol=1e-8)


# parser


def test_parse_legendre():
    op = parse_operator("t*(1-t)*D^2 + (1-2*t)*D - 1/4")
    want = DifferentialOperator([-0.25, 1 - 2 * t, t * (1 - t)])
    assert op.allclose(want)


def test_parse_noncommutative():
    assert parse_operator("D*t").allclose(DifferentialOperator([1, t]))
    assert parse_operator("t D").allclose(DifferentialOperator([0, t]))
    assert parse_operator("(D - 1/t) D").allclose(DifferentialOperator([0, -1 / t, 1]))
    assert parse_operator("D^2 / t").allclose(compose(DifferentialOperator([0, 0, 1]), DifferentialOperator([1 / t])))


def test_parse_numbers_and_functions():
    assert parse_number("1/2 + i/2") == complex(0.5, 0.5)
    assert parse_number("2**3") == 8
    f = parse_function("1/(t+2)")
    assert f(0) == pytest.approx(0.5)
    assert parse_function("D*t - t*D").allclose(1)


@pytest.mark.parametrize("text", ["", "D +", "(t", "t/D", "D^t", "x*D", "D - D", "0", "1/0"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_operator(text)


def test_parse_function_rejects_operator():
    with pytest.raises(ParseError):
        parse_function("D + 1")
    with pytest.raises(ParseError):
        parse_number("t")


def test_exact_literals():
    # 1/3 is parsed exactly before conversion, so the coefficient is the nearest double
    op = parse_operator("t*D - 1/3")
    assert op.coeffs[0](0) == -float(Fraction(1, 3))
