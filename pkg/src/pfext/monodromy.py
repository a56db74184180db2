"""Generator loops and the monodromy representation of an operator.

Matrices act on jet coordinates at the base point: continuing the solution
whose jet at ``t0`` is ``v`` once around the loop ``gamma`` returns the jet
``M_gamma v``. Running ``gamma`` and then ``delta`` gives ``M_delta M_gamma``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .continuation import ContinuationConfig, PathPolyline, companion_system, default_clearance, transfer
from .errors import NoValidBasepoint, NonFuchsian, PathTooCloseToSingularity
from .odeops import DifferentialOperator, SingularityProfile, fuchsian_check, normalize, pullback_to_infinity, singularities
from .odeops.singular import Location, is_infinity

ORIENTATION = "counterclockwise"
ORDERING = "arg(s - t0) increasing, measured counterclockwise from the exit ray"
ACTION = "v -> M v; gamma then delta => M_delta M_gamma"

UNIPOTENT_TOL = 1e-7
CONSISTENCY_TOL = 1e-7
POLYGON_SIDES = 16


def conventions() -> dict:
    return {"orientation": ORIENTATION, "ordering": ORDERING, "action": ACTION}


@dataclass(frozen=True)
class Loop:
    point: complex
    path: PathPolyline
    radius: float


@dataclass(frozen=True)
class LoopPlan:
    """Base point, the generator loops in product order, and the exit ray.

    ``exit_angle`` is the direction of a ray from the base point that avoids
    all singular points; with loops ordered by angle from it, running the
    loops in order is homotopic to one counterclockwise turn around all
    finite singular points, i.e. to the inverse of a loop around infinity.
    """

    base_point: complex
    loops: tuple[Loop, ...]
    clearance: float
    exit_angle: float = 0.0
    ordering: str = ORDERING

    @property
    def points(self) -> tuple[complex, ...]:
        return tuple(l.point for l in self.loops)

    def index_of(self, point: complex) -> int:
        for k, l in enumerate(self.loops):
            if abs(l.point - point) <= 1e-8 * (1 + abs(point)):
                return k
        raise KeyError(point)

    def as_dict(self) -> dict:
        from .report import cnum

        return {
            "base_point": cnum(self.base_point),
            "clearance": self.clearance,
            "exit_angle": self.exit_angle,
            "ordering": self.ordering,
            "orientation": ORIENTATION,
            "loops": [
                {"point": cnum(l.point), "radius": l.radius, "path": l.path.as_dict()} for l in self.loops
            ],
        }


def _seg_dist(a: complex, b: complex, p: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    s = ((p - a) * d.conjugate()).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(a + s * d - p)


def _route(a: complex, b: complex, obstacles: Sequence[complex], clearance: float, depth: int = 0) -> list[complex]:
    """Vertices after ``a`` of a polyline from ``a`` to ``b`` keeping ``clearance``.

    Obstacles too close to the straight segment are passed on the left of
    the direction of travel.
    """
    blocking = [p for p in obstacles if _seg_dist(a, b, p) < clearance]
    if not blocking or depth > 8:
        return [b]
    d = (b - a) / abs(b - a)
    p = min(blocking, key=lambda q: ((q - a) * d.conjugate()).real)
    waypoint = p + 2.0 * clearance * 1j * d
    return _route(a, waypoint, obstacles, clearance, depth + 1) + _route(waypoint, b, obstacles, clearance, depth + 1)


def _angular_exit(base: complex, points: Sequence[complex]) -> float:
    if not len(points):
        return 0.0
    angles = sorted(cmath.phase(p - base) % (2 * math.pi) for p in points)
    best_gap, best_angle = -1.0, 0.0
    for k, a in enumerate(angles):
        nxt = angles[(k + 1) % len(angles)] + (2 * math.pi if k + 1 == len(angles) else 0.0)
        if nxt - a > best_gap + 1e-12:
            best_gap, best_angle = nxt - a, (a + (nxt - a) / 2) % (2 * math.pi)
    return best_angle


def auto_basepoint(points: Sequence[complex], clearance: float, grid: int = 41) -> complex:
    """Grid point of the padded bounding box farthest from the singular points.

    Straight rays to the singular points must keep ``clearance`` from the
    other points; ties go to the point nearest the centroid, then upper
    half plane, then smaller real part.
    """
    pts = np.array(points, dtype=complex)
    if not len(pts):
        return 0j
    extent = max(np.ptp(pts.real), np.ptp(pts.imag))
    pad = max(0.5 * extent, 1.0 if len(pts) == 1 else 0.5 * extent)
    centroid = pts.mean()
    xs = np.linspace(pts.real.min() - pad, pts.real.max() + pad, grid)
    ys = np.linspace(pts.imag.min() - pad, pts.imag.max() + pad, grid)
    best = None
    for x in xs:
        for y in ys:
            z = complex(x, y)
            score = float(np.min(np.abs(pts - z)))
            for s in pts:
                others = [p for p in pts if p != s]
                if others:
                    score = min(score, min(_seg_dist(z, s, p) for p in others))
            key = (-round(score, 9), round(abs(z - centroid), 9), -round(y, 9), round(x, 9))
            if best is None or key < best[0]:
                best = (key, z, score)
    if best is None or best[2] < clearance:
        raise NoValidBasepoint("no grid point keeps the required clearance from all singular points")
    return best[1]


def generator_loops(
    profile: SingularityProfile | Sequence[complex],
    base_point: complex | None = None,
    clearance: float | None = None,
    sides: int = POLYGON_SIDES,
) -> LoopPlan:
    """One counterclockwise loop per finite singular point, based at ``base_point``.

    Each loop runs from the base point toward ``s``, around a ``sides``-gon
    of radius ``r_s`` (half the distance to the nearest other singular
    point, capped at half the distance to the base point), and back the
    same way.
    """
    if isinstance(profile, SingularityProfile):
        points = [complex(p.location) for p in profile.finite_points]
    else:
        points = [complex(p) for p in profile]
    if clearance is None:
        clearance = default_clearance(points)
    if base_point is None:
        base_point = auto_basepoint(points, clearance)
    base_point = complex(base_point)
    if points:
        d0 = min(abs(base_point - s) for s in points)
        if d0 < clearance:
            raise PathTooCloseToSingularity(
                f"base point {base_point} lies within {d0:.3g} of a singular point (clearance {clearance:.3g})"
            )
    exit_angle = _angular_exit(base_point, points)

    def angle_key(s: complex):
        return ((cmath.phase(s - base_point) - exit_angle) % (2 * math.pi), abs(s - base_point))

    loops = []
    cos_edge = math.cos(math.pi / sides)
    for s in sorted(points, key=angle_key):
        others = [p for p in points if p != s]
        nearest = min((abs(p - s) for p in others), default=math.inf)
        radius = min(0.5 * nearest, 0.5 * abs(base_point - s))
        if radius * cos_edge < clearance:
            raise PathTooCloseToSingularity(
                f"loop around {s} cannot keep clearance {clearance:.3g} (radius {radius:.3g})"
            )
        phi = cmath.phase(base_point - s)
        entry = s + radius * cmath.exp(1j * phi)
        approach = [base_point] + _route(base_point, entry, others, clearance)
        circle = PathPolyline.polygon(s, radius, sides, start_angle=phi).vertices
        verts = approach + list(circle[1:]) + approach[::-1][1:]
        loops.append(Loop(s, PathPolyline(tuple(verts), closed=True), radius))
    return LoopPlan(base_point, tuple(loops), float(clearance), exit_angle)


def infinity_path(plan: LoopPlan) -> PathPolyline:
    """Loop from the base point out along the exit ray, once counterclockwise
    around every finite singular point, and back."""
    t0 = plan.base_point
    if not plan.loops:
        return PathPolyline.polygon(t0 + 1.0, 1.0, 64, start_angle=math.pi)
    reach = max(abs(l.point - t0) + l.radius for l in plan.loops)
    radius = 1.5 * reach + 2 * plan.clearance
    circle = PathPolyline.polygon(t0, radius, 64, start_angle=plan.exit_angle).vertices
    return PathPolyline((t0,) + circle + (t0,), closed=True)


@dataclass(frozen=True)
class MonodromyRepresentation:
    """Monodromy matrices in the unit-jet basis at the base point."""

    operator: DifferentialOperator
    plan: LoopPlan
    matrices: tuple[np.ndarray, ...]
    errors: tuple[float, ...]
    infinity: np.ndarray
    config: ContinuationConfig = field(default_factory=ContinuationConfig)

    @property
    def dimension(self) -> int:
        return self.operator.order

    @property
    def base_point(self) -> complex:
        return self.plan.base_point

    def matrix_for(self, point: Location) -> np.ndarray:
        if is_infinity(point):
            return self.infinity
        return self.matrices[self.plan.index_of(complex(point))]

    def word(self, indices: Sequence[int]) -> np.ndarray:
        """Matrix of the loop running the generators ``indices`` in order."""
        out = np.eye(self.dimension, dtype=complex)
        for k in indices:
            out = self.matrices[k] @ out
        return out

    def product(self) -> np.ndarray:
        return self.word(range(len(self.matrices)))

    def product_relation_residual(self) -> float:
        """``|M_inf M_k ... M_1 - I|``; zero up to rounding since ``M_inf`` is defined by it."""
        n = self.dimension
        return float(np.linalg.norm(self.infinity @ self.product() - np.eye(n), 2))


def monodromy_representation(
    op: DifferentialOperator,
    plan: LoopPlan,
    config: ContinuationConfig | None = None,
    check_fuchsian: bool = True,
) -> MonodromyRepresentation:
    """Transfer matrices of the companion system around each generator loop."""
    cfg = config or ContinuationConfig()
    if check_fuchsian and not fuchsian_check(op).fuchsian:
        raise NonFuchsian("monodromy needs a Fuchsian operator")
    system = companion_system(op)
    results = [transfer(system, l.path, cfg, clearance=plan.clearance) for l in plan.loops]
    mats = tuple(r.matrix for r in results)
    errs = tuple(r.error_estimate for r in results)
    n = op.order
    prod = np.eye(n, dtype=complex)
    for m in mats:
        prod = m @ prod
    return MonodromyRepresentation(op, plan, mats, errs, np.linalg.inv(prod), cfg)


@dataclass(frozen=True)
class RelationCheck:
    direct: np.ndarray
    residual: float
    error_estimate: float
    infinity_eigenvalues: np.ndarray
    pulled_back_eigenvalues: np.ndarray
    eigenvalue_distance: float


def relation_check(rep: MonodromyRepresentation) -> RelationCheck:
    """Check the generator product against two independent continuations.

    The product ``M_k ... M_1`` is compared with the transfer around the big
    loop :func:`infinity_path`; the eigenvalues of ``M_inf`` are compared
    with those of the pulled-back operator continued around ``s = 0``.
    """
    system = companion_system(rep.operator)
    big = transfer(system, infinity_path(rep.plan), rep.config, clearance=rep.plan.clearance)
    scale = max(1.0, float(np.linalg.norm(big.matrix, 2)))
    residual = float(np.linalg.norm(big.matrix - rep.product(), 2)) / scale
    pulled = pulled_back_infinity_matrix(rep)
    ev_inf = np.linalg.eigvals(rep.infinity)
    ev_pull = np.linalg.eigvals(pulled)
    return RelationCheck(
        big.matrix,
        residual,
        big.error_estimate + sum(rep.errors),
        ev_inf,
        ev_pull,
        _multiset_distance(ev_inf, ev_pull),
    )


def pulled_back_infinity_matrix(rep: MonodromyRepresentation) -> np.ndarray:
    """Monodromy around ``s = 0`` of the operator in ``s = 1/t``, based at ``1/t0``."""
    pulled = normalize(pullback_to_infinity(rep.operator).coeffs)
    t0 = rep.base_point
    if t0 == 0:
        raise NoValidBasepoint("base point 0 has no image under s = 1/t")
    finite = [1 / p for p in rep.plan.points if p != 0]
    pts = finite + [0j]
    plan = generator_loops(pts, 1 / t0, clearance=default_clearance(pts))
    loop = plan.loops[plan.index_of(0j)]
    return transfer(companion_system(pulled), loop.path, rep.config, clearance=plan.clearance).matrix


def _multiset_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) != len(b):
        return math.inf
    if not len(a):
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass(frozen=True)
class PointConsistency:
    location: Location
    exponents: tuple[complex, ...]
    expected: tuple[complex, ...]
    eigenvalues: tuple[complex, ...]
    eigenvalue_distance: float
    charpoly_distance: float
    determinant_distance: float
    passed: bool


@dataclass(frozen=True)
class ConsistencyReport:
    points: tuple[PointConsistency, ...]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)


def local_consistency_check(
    rep: MonodromyRepresentation,
    profile: SingularityProfile,
    tol: float = CONSISTENCY_TOL,
) -> ConsistencyReport:
    """Compare each local monodromy with ``exp(2 pi i exponent)``.

    Multisets are compared through characteristic polynomials, which stay
    well conditioned for the non-semisimple matrices of logarithmic points;
    raw eigenvalue distances are reported as well.
    """
    out = []
    entries = [(l.point, rep.matrices[k]) for k, l in enumerate(rep.plan.loops)]
    entries.append(("infinity", rep.infinity))
    for loc, mat in entries:
        point = profile.point_at(loc)
        if not point.is_regular:
            continue
        exps = tuple(point.exponent_multiset)
        expected = np.exp(2j * np.pi * np.array(exps, dtype=complex))
        ev = np.linalg.eigvals(mat)
        cp = np.poly(mat)
        ce = np.poly(expected)
        cp_dist = float(np.max(np.abs(cp - ce)) / max(1.0, np.max(np.abs(ce))))
        det_dist = float(abs(np.linalg.det(mat) - np.prod(expected)))
        out.append(
            PointConsistency(
                loc,
                exps,
                tuple(expected),
                tuple(ev),
                _multiset_distance(ev, expected),
                cp_dist,
                det_dist,
                cp_dist < tol,
            )
        )
    return ConsistencyReport(tuple(out), tol)


@dataclass(frozen=True)
class AdmissibilityReport:
    unipotent: dict
    unipotent_ok: bool
    irreducible: bool | None
    irreducibility_heuristic: bool
    algebra_dimension: int | None
    common_invariant_line: bool | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.unipotent_ok and bool(self.irreducible)


def algebra_dimension(mats: Sequence[np.ndarray], tol: float = 1e-9) -> int:
    """Dimension of the matrix algebra generated by ``mats`` (Burnside test)."""
    n = mats[0].shape[0]
    basis: list[np.ndarray] = []

    def add(m: np.ndarray) -> bool:
        v = m.reshape(-1)
        if basis:
            b = np.array(basis).T
            coef, *_ = np.linalg.lstsq(b, v, rcond=None)
            v = v - b @ coef
        if np.linalg.norm(v) > tol * max(1.0, np.linalg.norm(m)):
            basis.append(v / np.linalg.norm(v))
            return True
        return False

    frontier = [np.eye(n, dtype=complex)]
    add(frontier[0])
    while frontier and len(basis) < n * n:
        nxt = []
        for w in frontier:
            for m in mats:
                p = m @ w
                if add(p):
                    nxt.append(p)
        frontier = nxt
    return len(basis)


def _common_eigenvector(mats: Sequence[np.ndarray], rng: np.random.Generator, tol: float) -> bool:
    words = list(mats) + [a @ b for a in mats for b in mats]
    combo = sum(complex(*rng.standard_normal(2)) * w for w in words)
    _, vecs = np.linalg.eig(combo)
    for v in vecs.T:
        v = v / np.linalg.norm(v)
        if all(np.linalg.norm(m @ v - (v.conj() @ m @ v) * v) <= tol * max(1.0, np.linalg.norm(m, 2)) for m in mats):
            return True
    return False


def admissibility_check(
    rep: MonodromyRepresentation,
    boundary: Sequence[Location],
    tol: float = UNIPOTENT_TOL,
    seed: int = 0,
) -> AdmissibilityReport:
    """Unipotency of the boundary monodromies and (for n <= 4) irreducibility.

    Irreducibility is decided by the dimension of the generated algebra
    (irreducible iff it is the full matrix algebra); a search for a common
    eigenvector of all generators, or of all transposes, along eigenvectors
    of a random element of the algebra gives a witness for reducibility.
    """
    n = rep.dimension
    unip = {}
    for loc in boundary:
        m = rep.matrix_for(loc)
        dev = float(np.linalg.norm(np.linalg.matrix_power(m - np.eye(n), n), 2))
        key = loc if isinstance(loc, str) else f"{complex(loc).real:.12g}{complex(loc).imag:+.12g}j"
        unip[key] = {"deviation": dev, "unipotent": dev < tol}
    unip_ok = all(v["unipotent"] for v in unip.values())
    mats = list(rep.matrices) + [rep.infinity]
    if n == 1:
        return AdmissibilityReport(unip, unip_ok, True, False, 1, False, tol)
    if n > 4:
        return AdmissibilityReport(unip, unip_ok, None, True, None, None, tol)
    dim = algebra_dimension(mats)
    rng = np.random.default_rng(seed)
    line = _common_eigenvector(mats, rng, 1e-7) or _common_eigenvector([m.T for m in mats], rng, 1e-7)
    irreducible = dim == n * n and not line
    return AdmissibilityReport(unip, unip_ok, irreducible, True, dim, line, tol)


def analyze_and_plan(op: DifferentialOperator, base_point: complex | None = None, clearance: float | None = None) -> tuple[SingularityProfile, LoopPlan]:
    profile = singularities(op)
    return profile, generator_loops(profile, base_point, clearance)
