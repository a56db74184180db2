import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pfext.acceptance import random_instances
from pfext.errors import ZeroFunction
from pfext.extension import (
    INCONCLUSIVE,
    NONTRIVIAL,
    TRIVIAL,
    Cocycle,
    InhomogeneousProblem,
    class_equal,
    cocycle_by_block,
    cocycle_by_continuation,
    cocycle_identity,
    extended_operator,
    extension_class,
    is_coboundary,
    relation_word,
    shift_by_coboundary,
)
from pfext.monodromy import generator_loops, monodromy_representation
from pfext.odeops import parse_function, parse_operator, singularities

from conftest import LEGENDRE, assert_close

TWO_PI_I = 2j * math.pi


def _setup(op_text, g_text, base=None, extra=()):
    problem = InhomogeneousProblem(parse_operator(op_text), parse_function(g_text))
    profile = problem.working_profile().with_punctures(list(extra)) if extra else problem.working_profile()
    rep = monodromy_representation(problem.operator, generator_loops(profile, base))
    return problem, rep


def test_log_extension_both_routes():
    problem, rep = _setup("D", "1/t", base=1)
    a = cocycle_by_continuation(problem, rep)
    assert abs(a.vectors[0][0] - TWO_PI_I) < 1e-12
    block = cocycle_by_block(problem, rep)
    assert_close(block.blocks[0], [[1, TWO_PI_I], [0, 1]], 1e-12)
    assert abs(block.cocycle.vectors[0][0] - TWO_PI_I) < 1e-12
    assert extension_class(problem, rep, a).verdict == NONTRIVIAL


def test_exact_extension_is_trivial():
    problem, rep = _setup("D", "2*t", base=1)
    a = cocycle_by_continuation(problem, rep)
    res = is_coboundary(rep, a)
    assert res.verdict == TRIVIAL
    assert_close(res.witness, [0], 1e-15)


def test_single_valued_particular_solution_gives_witness():
    # t h' - h/2 = -1/2 has h = 1; the zero-jet solution is 1 - sqrt(t/t0)
    problem, rep = _setup("t*D - 1/2", "-1/2")
    a = cocycle_by_continuation(problem, rep)
    assert abs(a.vectors[0][0] - 2) < 1e-11
    res = is_coboundary(rep, a)
    assert res.verdict == TRIVIAL
    m = rep.matrices[0]
    assert_close((m - np.eye(1)) @ res.witness, a.vectors[0], 1e-11)
    assert abs(res.witness[0] + 1) < 1e-11


def test_degenerate_inhomogeneity():
    problem, rep = _setup(LEGENDRE, "0", base=0.5 + 0.5j)
    assert problem.degenerate
    a = cocycle_by_continuation(problem, rep)
    assert all(np.linalg.norm(v) == 0 for v in a.vectors)
    block = cocycle_by_block(problem, rep)
    assert block.degenerate and block.extended_operator is None
    assert is_coboundary(rep, a).trivial
    with pytest.raises(ZeroFunction):
        extended_operator(problem)


def test_extended_operator_examples():
    problem = InhomogeneousProblem(parse_operator("D"), parse_function("1/t"))
    ext = extended_operator(problem)
    want = parse_operator("D^2 + (1/t)*D")
    assert ext.order == 2
    for z in (0.3 + 0.1j, 2.0, -1.5j):
        lead = ext.leading(z)
        for c, w in zip(ext.coeffs, want.coeffs):
            assert abs(c(z) / lead - w(z)) < 1e-13
    const = InhomogeneousProblem(parse_operator(LEGENDRE), parse_function("1"))
    assert extended_operator(const).order == 3


def _sympy_extended(op_coeffs, g):
    t = sp.symbols("t")
    h = sp.Function("h")(t)
    L = sum(c * sp.diff(h, t, i) for i, c in enumerate(op_coeffs))
    expr = sp.expand(sp.diff(L, t) - sp.diff(g, t) / g * L)
    n = len(op_coeffs)
    return t, [sp.simplify(expr.coeff(sp.diff(h, t, i)) if i else expr.subs({sp.diff(h, t, j): 0 for j in range(n, 0, -1)}).coeff(h)) for i in range(n + 1)]


@pytest.mark.parametrize("g_text", ["1", "1/(t-2)", "t/(t+2)"])
def test_extended_operator_matches_sympy(g_text):
    t = sp.symbols("t")
    coeffs = [sp.Rational(-1, 4), 1 - 2 * t, t * (1 - t)]
    g = sp.sympify(g_text.replace("^", "**"), locals={"t": t})
    ts, want = _sympy_extended(coeffs, g)
    ext = extended_operator(InhomogeneousProblem(parse_operator(LEGENDRE), parse_function(g_text)))
    for z in (0.3 + 0.1j, 1.7 - 0.4j):
        lead_want = complex(want[-1].subs(ts, z))
        lead = ext.leading(z)
        for i, w in enumerate(want):
            assert abs(ext.coeffs[i](z) / lead - complex(w.subs(ts, z)) / lead_want) < 1e-12


def test_constant_g_adds_no_singularities():
    ext = extended_operator(InhomogeneousProblem(parse_operator(LEGENDRE), parse_function("1")))
    finite = {complex(p.location) for p in singularities(ext).finite_points}
    assert all(min(abs(z - 0), abs(z - 1)) < 1e-12 for z in finite)


def test_routes_agree_on_corpus(corpus):
    for name in corpus.inhomogeneous():
        pipe = corpus.pipeline(name)
        rep, problem = pipe.representation, pipe.inhomogeneous
        cont = cocycle_by_continuation(problem, rep)
        block = cocycle_by_block(problem, rep)
        assert block.max_bottom_deviation < 1e-7, name
        assert max(block.diagonal_deviations, default=0) < 1e-7, name
        assert cont.distance(block.cocycle) <= max(1e-12, 10 * (cont.error + block.cocycle.error)), name
        assert class_equal(rep, cont, block.cocycle).trivial, name


def test_linearity():
    g1, g2 = "1/(t-2)", "1"
    p1, rep = _setup(LEGENDRE, g1, base=0.5 + 0.5j)
    p2 = InhomogeneousProblem(p1.operator, parse_function(g2))
    p12 = InhomogeneousProblem(p1.operator, parse_function("(t-1)/(t-2)"))
    a1, a2, a12 = (cocycle_by_continuation(p, rep) for p in (p1, p2, p12))
    assert (a1 + a2).distance(a12) < 1e-10
    p3 = InhomogeneousProblem(p1.operator, parse_function("3/(t-2)"))
    assert cocycle_by_continuation(p3, rep).distance(Cocycle(rep, tuple(3 * v for v in a1.vectors), a1.errors)) < 1e-10


def test_lifting_independence():
    problem, rep = _setup(LEGENDRE, "t/(t+2)")
    a = cocycle_by_continuation(problem, rep)
    v = np.array([0.7 - 0.2j, -1.1 + 0.4j])
    b = cocycle_by_continuation(problem, rep, initial_jet=v)
    assert b.distance(shift_by_coboundary(a, v)) < 1e-10
    assert class_equal(rep, a, b).trivial
    assert extension_class(problem, rep, b).verdict == extension_class(problem, rep, a).verdict == NONTRIVIAL


@settings(max_examples=15)
@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_shift_round_trip(c0):
    problem, rep = _setup(LEGENDRE, "t/(t+2)", base=0.5 + 0.5j, extra=())
    a = _cached_cocycle(problem, rep)
    c = np.array([c0, 1j * c0.conjugate() + 1])
    shifted = shift_by_coboundary(a, c)
    back = shift_by_coboundary(shifted, -c)
    assert back.distance(a) < 1e-12 * (1 + abs(c0))
    assert class_equal(rep, a, shifted).trivial
    assert is_coboundary(rep, shifted).verdict == NONTRIVIAL


_CACHE = {}


def _cached_cocycle(problem, rep):
    key = (str(problem.g), rep.base_point)
    if key not in _CACHE:
        _CACHE[key] = cocycle_by_continuation(problem, rep)
    return _CACHE[key]


def _band_cocycle(rep, delta):
    stack = np.vstack([m - np.eye(2) for m in rep.matrices])
    u, _, _ = np.linalg.svd(stack)
    c = np.array([1.0, -0.5j])
    image = stack @ c
    rhs = image / np.linalg.norm(image) + delta * u[:, -1]
    vecs = (rhs[:2], rhs[2:])
    return Cocycle(rep, vecs, (0.0, 0.0))


@pytest.mark.parametrize(
    "delta,verdict", [(1e-9, TRIVIAL), (1e-6, INCONCLUSIVE), (1e-3, NONTRIVIAL)]
)
def test_verdict_bands(legendre_rep, delta, verdict):
    res = is_coboundary(legendre_rep, _band_cocycle(legendre_rep, delta))
    assert res.verdict == verdict
    assert res.residual == pytest.approx(delta, rel=1e-3)


def test_zero_floor_uses_error(legendre_rep):
    small = Cocycle(legendre_rep, (np.array([1e-8, 0]), np.zeros(2)), (1e-8, 0.0))
    assert is_coboundary(legendre_rep, small).trivial
    noisy = Cocycle(legendre_rep, (np.array([1e-8, 0]), np.zeros(2)), (0.0, 0.0))
    assert is_coboundary(legendre_rep, noisy).verdict == NONTRIVIAL


def test_class_equal_needs_matching_generators(legendre_rep):
    a = Cocycle(legendre_rep, (np.zeros(2),), (0.0,))
    b = Cocycle(legendre_rep, (np.zeros(2), np.zeros(2)), (0.0, 0.0))
    with pytest.raises(ValueError):
        class_equal(legendre_rep, a, b)


def test_plan_must_cover_g_points(legendre_rep):
    problem = InhomogeneousProblem(legendre_rep.operator, parse_function("1/(t-2)"))
    with pytest.raises(ValueError):
        cocycle_by_continuation(problem, legendre_rep)


@pytest.mark.parametrize("idx", range(4))
def test_cocycle_identity_and_relation_on_random_instances(idx):
    problem, rep, (i, j) = random_instances(4, seed=7)[idx]
    a = cocycle_by_continuation(problem, rep)
    chk = cocycle_identity(problem, rep, a, i, j)
    assert chk.deviation <= max(1e-12, 10 * chk.error_estimate)
    rel = relation_word(problem, rep, a)
    assert rel.deviation <= max(1e-12, 10 * rel.error_estimate)
