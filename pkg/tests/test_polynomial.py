from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfext.errors import RootIsolationFailure
from pfext.odeops import Polynomial, cluster_roots
from pfext.odeops.polynomial import format_poly, to_complex

from conftest import assert_close

small = st.integers(-6, 6).map(lambda k: k / 2)
roots_st = st.lists(
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(lambda p: complex(*p) / 2),
    min_size=1,
    max_size=5,
    unique=True,
)


def test_zero_polynomial_is_empty():
    p = Polynomial([0, 0])
    assert p.is_zero() and p.degree == -1 and len(p.coeffs) == 0


def test_trailing_zeros_trimmed():
    assert Polynomial([1, 2, 0, 0]).degree == 1


def test_exact_inputs():
    assert to_complex(Fraction(1, 3)) == pytest.approx(1 / 3)
    assert to_complex((Fraction(1, 2), Fraction(-3, 4))) == complex(0.5, -0.75)
    with pytest.raises(TypeError):
        to_complex("x")


def test_arithmetic():
    t = Polynomial.variable()
    p = (t - 1) * (t + 1)
    assert p.allclose(Polynomial([-1, 0, 1]))
    assert (p - p).is_zero()
    q, r = (t**3 + 1).divmod(t + 1)
    assert q.allclose(Polynomial([1, -1, 1])) and r.is_zero()
    assert p.derivative().allclose(Polynomial([0, 2]))
    assert p.derivative(3).is_zero()
    assert p(2) == 3


def test_taylor_shift():
    p = Polynomial([1, 2, 3])
    # p(t) = 3 (t - 1)^2 + 8 (t - 1) + 6
    assert_close(p.taylor_shift(1.0), [6, 8, 3], 1e-14)


def test_multiplicity():
    p = Polynomial.from_roots([1, 1, 1, 2j])
    assert p.multiplicity_at(1.0) == 3
    assert p.multiplicity_at(2j) == 1
    assert p.multiplicity_at(5.0) == 0


def test_format():
    assert format_poly(Polynomial([-1, 0, 1])) == "-1 + t^2"


@given(roots_st)
def test_roots_recovered(roots):
    p = Polynomial.from_roots(roots)
    found = sorted(p.roots(), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    want = sorted(roots, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    assert_close(found, want, 1e-8)


@given(roots_st, st.lists(st.integers(1, 3), min_size=5, max_size=5))
def test_cluster_multiplicities(roots, mults):
    full = [r for r, m in zip(roots, mults) for _ in range(m)]
    clusters = cluster_roots(Polynomial.from_roots(full))
    got = {(round(z.real, 6), round(z.imag, 6)): m for z, m in clusters}
    want = {(round(r.real, 6), round(r.imag, 6)): m for r, m in zip(roots, mults)}
    assert got == want


@given(st.lists(small, min_size=1, max_size=4), st.lists(small, min_size=1, max_size=4))
def test_product_degree_and_value(a, b):
    p, q = Polynomial(a), Polynomial(b)
    if p.is_zero() or q.is_zero():
        assert (p * q).is_zero()
        return
    assert (p * q).degree == p.degree + q.degree
    z = 0.3 - 0.7j
    assert abs((p * q)(z) - p(z) * q(z)) < 1e-12 * (1 + abs(p(z) * q(z)))


def test_near_double_root_next_to_simple_root():
    # eigenvalues scatter the close pair by ~1e-7; the tighter regrouping recovers it
    clusters = cluster_roots(Polynomial.from_roots([1.0, 1.0 + 2e-9, 1.0005]))
    assert [m for _, m in clusters] == [2, 1]
    assert abs(clusters[0][0] - 1.0) < 1e-8
    assert abs(clusters[1][0] - 1.0005) < 1e-8


def test_unseparable_roots_raise():
    # 0 and 1e-9 are distinct relative to the local scale but closer than the merge tolerance
    with pytest.raises(RootIsolationFailure):
        cluster_roots(Polynomial.from_roots([0.0, 1e-9, 3e-4]))
