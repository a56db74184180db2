import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pfext.acceptance import abel_determinant, contour_integral, random_fuchsian
from pfext.continuation import (
    ContinuationConfig,
    JetVector,
    PathPolyline,
    companion_system,
    default_clearance,
    transfer,
    transport_jet,
)
from pfext.errors import PathTooCloseToSingularity, PrecisionExhausted
from pfext.odeops import RationalFunction, parse_function, parse_operator

from conftest import LEGENDRE, assert_close

t = RationalFunction.variable()
unit_loop = PathPolyline.polygon(0, 1.0, 16)


def test_companion_examples():
    sysm = companion_system(parse_operator("D^2"))
    assert_close(sysm.matrix_at(0.3), [[0, 1], [0, 0]], 1e-15)
    leg = companion_system(parse_operator(LEGENDRE))
    z = 0.3 + 0.2j
    want = [1 / (4 * z * (1 - z)), -(1 - 2 * z) / (z * (1 - z))]
    assert_close(leg.matrix_at(z)[1], want, 1e-14)
    assert leg.is_homogeneous
    inh = companion_system(parse_operator("D"), parse_function("1/t"))
    assert_close(inh.matrix_at(2.0), [[0]], 1e-15)
    assert inh.inhomogeneity[0](2.0) == pytest.approx(0.5)


def test_zero_system_is_identity():
    res = transfer(companion_system(parse_operator("D")), PathPolyline((0, 1 + 1j, 2)))
    assert_close(res.matrix, np.eye(1), 1e-15)


def test_nilpotent_system():
    # D^3: A is a constant shift matrix, so T = exp(2A)
    res = transfer(companion_system(parse_operator("D^3")), PathPolyline((0, 1 + 1j, 2)))
    assert_close(res.matrix, [[1, 2, 2], [0, 1, 2], [0, 0, 1]], 1e-13)


@pytest.mark.parametrize("lam", [1 / 3, 0.5, -0.25 + 0.5j, 2.0])
def test_euler_multiplier(lam):
    op = parse_operator("t*D") - lam
    res = transfer(companion_system(op), unit_loop)
    assert abs(res.matrix[0, 0] - cmath.exp(2j * math.pi * lam)) < 1e-12
    assert res.error_estimate < 1e-10


def test_exponential_on_unit_interval():
    res = transfer(companion_system(parse_operator("D - 1")), PathPolyline.segment(0, 1))
    assert abs(res.matrix[0, 0] - math.e) < 1e-14


def test_long_segment_without_poles():
    res = transfer(companion_system(parse_operator("D - 1")), PathPolyline.segment(0, 30))
    assert abs(res.matrix[0, 0] / math.exp(30) - 1) < 1e-12


def test_transport_jet_examples():
    sysm = companion_system(parse_operator("D"), parse_function("1"))
    out = transport_jet(sysm, PathPolyline.segment(0, 1), JetVector(0, [0]))
    assert out.base == 1 and abs(out.values[0] - 1) < 1e-14
    log = companion_system(parse_operator("D"), parse_function("1/t"))
    loop = PathPolyline.polygon(0, 1.0, 16)
    value = transport_jet(log, loop, [0]).values[0]
    oracle = contour_integral(lambda z: 1 / z, loop)
    assert abs(value - oracle) < 1e-12 and abs(oracle - 2j * math.pi) < 1e-12
    leg = companion_system(parse_operator(LEGENDRE))
    path = PathPolyline((0.5 + 0.5j, 2 + 1j, 3 - 1j))
    v = np.array([1 - 1j, 2.0])
    assert_close(transport_jet(leg, path, v).values, transfer(leg, path).matrix @ v, 1e-14)


def test_jet_validation():
    sysm = companion_system(parse_operator("D^2"))
    with pytest.raises(ValueError):
        transport_jet(sysm, PathPolyline.segment(0, 1), [1])
    with pytest.raises(ValueError):
        transport_jet(sysm, PathPolyline.segment(0, 1), JetVector(5, [1, 0]))


def test_clearance_violation():
    sysm = companion_system(parse_operator(LEGENDRE))
    with pytest.raises(PathTooCloseToSingularity):
        transfer(sysm, PathPolyline.segment(-1 + 0.01j, 2 + 0.01j))
    with pytest.raises(PathTooCloseToSingularity):
        transfer(sysm, PathPolyline.segment(0.5 + 0.5j, 0.5 - 0.5j), clearance=0.6)


def test_precision_exhausted():
    cfg = ContinuationConfig(order_start=4, order_max=4, tail_tol=1e-30, max_halvings=2)
    with pytest.raises(PrecisionExhausted):
        transfer(companion_system(parse_operator(LEGENDRE)), PathPolyline.segment(0.5 + 0.5j, 2 + 1j), cfg)


def test_path_validation():
    with pytest.raises(ValueError):
        PathPolyline((1,))
    with pytest.raises(ValueError):
        PathPolyline((0, 0, 1))
    with pytest.raises(ValueError):
        PathPolyline((0, 1, 2), closed=True)
    with pytest.raises(ValueError):
        PathPolyline.segment(0, 1).then(PathPolyline.segment(2, 3))


def test_default_clearance():
    assert default_clearance([0, 1]) == pytest.approx(0.1)
    assert default_clearance([3j]) == pytest.approx(0.3)
    assert default_clearance([]) == pytest.approx(0.1)


# properties on random Fuchsian systems and random paths


@st.composite
def systems_and_paths(draw, n_vertices=4):
    seed = draw(st.integers(0, 10_000))
    op, points = random_fuchsian(np.random.default_rng(seed))
    verts = [complex(draw(st.integers(-8, 8)) / 2 + 0.25, draw(st.integers(-6, 6)) / 2 + 0.25) for _ in range(n_vertices)]
    assume(all(a != b for a, b in zip(verts, verts[1:])))
    path = PathPolyline(tuple(verts))
    assume(path.min_distance(points) > 0.2)
    return op, points, path


def _transfer(op, path, **kw):
    return transfer(companion_system(op), path, clearance=0.2, **kw)


@given(systems_and_paths(n_vertices=5))
def test_concatenation(data):
    op, _, path = data
    first = PathPolyline(path.vertices[:3])
    second = PathPolyline(path.vertices[2:])
    whole = _transfer(op, first.then(second))
    a, b = _transfer(op, first), _transfer(op, second)
    scale = np.linalg.norm(whole.matrix, 2)
    err = float(np.linalg.norm(whole.matrix - b.matrix @ a.matrix, 2))
    bound = whole.error_estimate + np.linalg.norm(b.matrix, 2) * a.error_estimate + b.error_estimate * np.linalg.norm(a.matrix, 2)
    assert err <= 10 * bound + 1e-15 * scale


@given(systems_and_paths())
def test_reversal(data):
    op, _, path = data
    fwd, back = _transfer(op, path), _transfer(op, path.reversed())
    prod = back.matrix @ fwd.matrix
    bound = np.linalg.norm(back.matrix, 2) * fwd.error_estimate + back.error_estimate * np.linalg.norm(fwd.matrix, 2)
    assert np.linalg.norm(prod - np.eye(op.order), 2) <= 10 * bound


@given(systems_and_paths())
def test_wronskian_matches_abel(data):
    op, _, path = data
    res = _transfer(op, path)
    abel = abel_determinant(op, path)
    det = np.linalg.det(res.matrix)
    cond_bound = res.error_estimate * np.linalg.norm(res.matrix, 2) ** (op.order - 1) * op.order
    assert abs(det - abel) <= 1e-9 * abs(abel) + 10 * cond_bound


@given(systems_and_paths())
def test_refinement_within_estimate(data):
    op, _, path = data
    cfg = ContinuationConfig()
    coarse = _transfer(op, path, config=cfg)
    fine = _transfer(op, path, config=replace(cfg, theta=cfg.theta / 2))
    assert np.linalg.norm(fine.matrix - coarse.matrix, 2) <= coarse.error_estimate


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=16, max_size=16))
def test_homotopy_stability(jitter):
    # loop of radius 1/2 around 0 for Legendre; clearance 0.1, vertices moved by < 0.05
    op = parse_operator(LEGENDRE)
    base = PathPolyline.polygon(0, 0.5, 16)
    verts = list(base.vertices)
    for k in range(1, 16):
        dx, dy = jitter[k]
        verts[k] = verts[k] + 0.035 * complex(dx, dy)
    moved = PathPolyline(tuple(verts), closed=True)
    a = transfer(companion_system(op), base, clearance=0.1)
    b = transfer(companion_system(op), moved, clearance=0.1)
    assert np.linalg.norm(a.matrix - b.matrix, 2) <= 10 * max(a.error_estimate, b.error_estimate)


def test_error_estimate_is_finite_and_small():
    res = transfer(companion_system(parse_operator(LEGENDRE)), PathPolyline.polygon(0, 0.5, 16, start_angle=math.pi / 4))
    assert 0 < res.error_estimate < 1e-10
    assert res.steps_taken >= 16
