"""Extension data of an inhomogeneous equation ``D h = g``.

The cocycle ``gamma -> a_gamma`` records how a particular solution changes
under continuation: ``gamma(h) = h + sum a_i omega_i`` in the basis of
solutions whose jets at the base point are the unit vectors. It is computed
two ways:

* by continuing ``h`` (zero jet at the base point) with the inhomogeneous
  first order system, and
* from the block monodromy ``[[M, a], [0, 1]]`` of the homogeneous operator
  ``(d/dt - g'/g) D``, whose solution space contains those of ``D`` and ``h``.

Cocycles are compared modulo coboundaries ``gamma -> (M_gamma - I) c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .continuation import PathPolyline, companion_system, transfer
from .errors import LiftFailure
from .monodromy import MonodromyRepresentation, infinity_path
from .odeops import DifferentialOperator, RationalFunction, SingularityProfile, compose, dlog, singularities

COCYCLE_CONVENTION = "a_(gamma then delta) = a_delta + M_delta a_gamma"
CLASS_TOL = 1e-6
ZERO_TOL = 1e-9

TRIVIAL = "trivial"
NONTRIVIAL = "nontrivial"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class InhomogeneousProblem:
    """``operator h = g`` with an inert twist label.

    ``g`` may be the zero function; that degenerate case is carried through
    every computation and flagged in reports.
    """

    operator: DifferentialOperator
    g: RationalFunction
    twist: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "g", RationalFunction.coerce(self.g))

    @property
    def degenerate(self) -> bool:
        return self.g.is_zero()

    def g_points(self) -> list[complex]:
        """Zeros and poles of ``g``; the extended operator is singular there."""
        if self.degenerate:
            return []
        return [z for z, _ in self.g.zeros()] + [z for z, _ in self.g.poles()]

    def working_profile(self) -> SingularityProfile:
        return singularities(self.operator).with_punctures(self.g_points())


@dataclass(frozen=True)
class Cocycle:
    representation: MonodromyRepresentation
    vectors: tuple[np.ndarray, ...]
    errors: tuple[float, ...]
    route: str = "continuation"
    initial_jet: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(np.asarray(v, dtype=complex) for v in self.vectors))

    @property
    def stacked(self) -> np.ndarray:
        if not self.vectors:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.vectors)

    @property
    def error(self) -> float:
        return float(sum(self.errors))

    def __sub__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle(
            self.representation,
            tuple(a - b for a, b in zip(self.vectors, other.vectors)),
            tuple(x + y for x, y in zip(self.errors, other.errors)),
            f"{self.route}-{other.route}",
        )

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle(
            self.representation,
            tuple(a + b for a, b in zip(self.vectors, other.vectors)),
            tuple(x + y for x, y in zip(self.errors, other.errors)),
            f"{self.route}+{other.route}",
        )

    def distance(self, other: "Cocycle") -> float:
        return float(max((np.linalg.norm(a - b) for a, b in zip(self.vectors, other.vectors)), default=0.0))


@dataclass(frozen=True)
class CoboundaryResult:
    verdict: str
    witness: np.ndarray
    residual: float
    tolerance: float

    @property
    def trivial(self) -> bool:
        return self.verdict == TRIVIAL


@dataclass(frozen=True)
class ExtensionClass:
    cocycle: Cocycle
    verdict: str
    witness: np.ndarray | None
    residual: float
    twist: int | None = None


@dataclass(frozen=True)
class BlockMonodromyReport:
    extended_operator: DifferentialOperator | None
    blocks: tuple[np.ndarray, ...]
    cocycle: Cocycle
    bottom_deviations: tuple[float, ...]
    diagonal_deviations: tuple[float, ...]
    frame_condition: float
    degenerate: bool = False

    @property
    def max_bottom_deviation(self) -> float:
        return max(self.bottom_deviations, default=0.0)


def extended_operator(problem: InhomogeneousProblem) -> DifferentialOperator:
    """``(d/dt - g'/g) o D``; raises ZeroFunction when ``g = 0``."""
    first = DifferentialOperator([-dlog(problem.g), 1])
    return compose(first, problem.operator)


def _check_plan(problem: InhomogeneousProblem, rep: MonodromyRepresentation) -> None:
    for z in problem.g_points():
        try:
            rep.plan.index_of(z)
        except KeyError:
            raise ValueError(
                f"loop plan has no generator around {z}, where g has a zero or pole; "
                "build it from the working profile of the problem"
            ) from None


def path_cocycle(
    problem: InhomogeneousProblem,
    rep: MonodromyRepresentation,
    path: PathPolyline,
    initial_jet: Sequence[complex] | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Continue the particular solution along a closed path at the base point.

    Returns ``(M, a, error)`` where ``a = jet(gamma(h)) - jet(h)`` for the
    solution ``h`` whose jet at the base point is ``initial_jet`` (zero by
    default).
    """
    n = problem.operator.order
    v = np.zeros(n, dtype=complex) if initial_jet is None else np.asarray(initial_jet, dtype=complex)
    if problem.degenerate:
        system = companion_system(problem.operator)
    else:
        system = companion_system(problem.operator, problem.g)
    res = transfer(system, path, rep.config, clearance=rep.plan.clearance)
    a = res.matrix @ v + res.particular_shift - v
    return res.matrix, a, res.error_estimate * (1.0 + float(np.linalg.norm(v)))


def cocycle_by_continuation(
    problem: InhomogeneousProblem,
    rep: MonodromyRepresentation,
    initial_jet: Sequence[complex] | None = None,
) -> Cocycle:
    """``a_gamma`` for every generator, from the inhomogeneous transport."""
    _check_plan(problem, rep)
    vecs, errs = [], []
    for loop in rep.plan.loops:
        _, a, err = path_cocycle(problem, rep, loop.path, initial_jet)
        vecs.append(a)
        errs.append(err)
    jet = None if initial_jet is None else np.asarray(initial_jet, dtype=complex)
    return Cocycle(rep, tuple(vecs), tuple(errs), "continuation", jet)


def adapted_frame(problem: InhomogeneousProblem, t0: complex) -> np.ndarray:
    """Jets of order ``n`` at ``t0`` of the unit-jet basis of ``D`` and of ``h``.

    Columns ``0..n-1`` lift the unit jets using ``D omega = 0``; column ``n``
    lifts the zero jet of ``h`` using ``D h = g``.
    """
    op = problem.operator
    n = op.order
    lead = complex(op.leading(t0))
    if not np.isfinite(lead) or abs(lead) <= 1e-14 * max(1.0, op.leading.num.abs_scale(t0)):
        raise LiftFailure(f"leading coefficient vanishes at the base point {t0}")
    frame = np.zeros((n + 1, n + 1), dtype=complex)
    frame[:n, :n] = np.eye(n)
    for i in range(n):
        frame[n, i] = -complex(op.coeffs[i](t0)) / lead
    gval = complex(problem.g(t0))
    if not np.isfinite(gval):
        raise LiftFailure(f"g has a pole at the base point {t0}")
    frame[n, n] = gval / lead
    return frame


def cocycle_by_block(problem: InhomogeneousProblem, rep: MonodromyRepresentation) -> BlockMonodromyReport:
    """Block monodromy of the extended operator in the adapted frame."""
    _check_plan(problem, rep)
    n = problem.operator.order
    if problem.degenerate:
        blocks = []
        for m in rep.matrices:
            b = np.eye(n + 1, dtype=complex)
            b[:n, :n] = m
            blocks.append(b)
        coc = Cocycle(rep, tuple(np.zeros(n, dtype=complex) for _ in blocks), tuple(0.0 for _ in blocks), "block")
        zeros = tuple(0.0 for _ in blocks)
        return BlockMonodromyReport(None, tuple(blocks), coc, zeros, zeros, 1.0, True)
    ext = extended_operator(problem)
    frame = adapted_frame(problem, rep.base_point)
    inv = np.linalg.inv(frame)
    cond = float(np.linalg.cond(frame))
    system = companion_system(ext)
    blocks, vecs, errs, bottom, diag = [], [], [], [], []
    last = np.zeros(n + 1, dtype=complex)
    last[n] = 1.0
    for k, loop in enumerate(rep.plan.loops):
        res = transfer(system, loop.path, rep.config, clearance=rep.plan.clearance)
        b = inv @ res.matrix @ frame
        blocks.append(b)
        vecs.append(b[:n, n].copy())
        errs.append(res.error_estimate * cond)
        bottom.append(float(np.linalg.norm(b[n, :] - last)))
        diag.append(float(np.linalg.norm(b[:n, :n] - rep.matrices[k])))
    coc = Cocycle(rep, tuple(vecs), tuple(errs), "block")
    return BlockMonodromyReport(ext, tuple(blocks), coc, tuple(bottom), tuple(diag), cond)


def is_coboundary(
    rep: MonodromyRepresentation,
    a: Cocycle,
    tol: float = CLASS_TOL,
    zero_tol: float = ZERO_TOL,
) -> CoboundaryResult:
    """Least squares solve of ``(M_i - I) c = a_i`` over all generators.

    A cocycle whose norm is below ``max(zero_tol, 10 * error)`` is trivial
    with witness 0. Otherwise the verdict follows the relative residual:
    trivial below ``tol / 10``, nontrivial above ``10 * tol``, inconclusive
    in between.
    """
    n = rep.dimension
    k = len(rep.matrices)
    rhs = a.stacked
    norm = float(np.linalg.norm(rhs))
    if k == 0 or norm <= max(zero_tol, 10 * a.error):
        return CoboundaryResult(TRIVIAL, np.zeros(n, dtype=complex), norm, tol)
    stack = np.vstack([m - np.eye(n) for m in rep.matrices])
    c, *_ = np.linalg.lstsq(stack, rhs, rcond=1e-10)
    residual = float(np.linalg.norm(stack @ c - rhs)) / norm
    if residual < tol / 10:
        verdict = TRIVIAL
    elif residual > 10 * tol:
        verdict = NONTRIVIAL
    else:
        verdict = INCONCLUSIVE
    return CoboundaryResult(verdict, c, residual, tol)


def shift_by_coboundary(a: Cocycle, c: Sequence[complex]) -> Cocycle:
    """``a_gamma + (M_gamma - I) c`` for every generator."""
    c = np.asarray(c, dtype=complex)
    rep = a.representation
    n = rep.dimension
    vecs = tuple(v + (m - np.eye(n)) @ c for v, m in zip(a.vectors, rep.matrices))
    return Cocycle(rep, vecs, a.errors, a.route, a.initial_jet)


def class_equal(rep: MonodromyRepresentation, a: Cocycle, b: Cocycle, tol: float = CLASS_TOL, zero_tol: float = ZERO_TOL) -> CoboundaryResult:
    """Whether ``a`` and ``b`` differ by a coboundary."""
    if len(a.vectors) != len(b.vectors):
        raise ValueError("cocycles have different numbers of generators")
    return is_coboundary(rep, a - b, tol, zero_tol)


def extension_class(problem: InhomogeneousProblem, rep: MonodromyRepresentation, cocycle: Cocycle, tol: float = CLASS_TOL) -> ExtensionClass:
    res = is_coboundary(rep, cocycle, tol)
    return ExtensionClass(cocycle, res.verdict, res.witness if res.trivial else None, res.residual, problem.twist)


@dataclass(frozen=True)
class CocycleIdentityCheck:
    first: int
    second: int
    direct: np.ndarray
    composed: np.ndarray
    deviation: float
    error_estimate: float


def cocycle_identity(problem: InhomogeneousProblem, rep: MonodromyRepresentation, a: Cocycle, first: int, second: int) -> CocycleIdentityCheck:
    """Continue along ``gamma_first`` then ``gamma_second`` and compare with the identity."""
    loops = rep.plan.loops
    path = loops[first].path.then(loops[second].path)
    _, direct, err = path_cocycle(problem, rep, path)
    m2 = rep.matrices[second]
    composed = a.vectors[second] + m2 @ a.vectors[first]
    combined = err + a.errors[second] + np.linalg.norm(m2, 2) * a.errors[first] + rep.errors[second] * np.linalg.norm(a.vectors[first])
    return CocycleIdentityCheck(first, second, direct, composed, float(np.linalg.norm(direct - composed)), float(combined))


@dataclass(frozen=True)
class RelationWordCheck:
    word_cocycle: np.ndarray
    direct_cocycle: np.ndarray
    infinity_cocycle: np.ndarray
    relation_value: np.ndarray
    deviation: float
    error_estimate: float


def relation_word(problem: InhomogeneousProblem, rep: MonodromyRepresentation, a: Cocycle) -> RelationWordCheck:
    """Evaluate the cocycle on ``gamma_1 ... gamma_k`` followed by the loop at infinity.

    The cocycle of the loop at infinity is taken from a direct continuation
    of the inverse big loop, so the relation value (which must vanish) tests
    the generator data against an independent path.
    """
    n = rep.dimension
    word = np.zeros(n, dtype=complex)
    err = 0.0
    for k, v in enumerate(a.vectors):
        m = rep.matrices[k]
        word = v + m @ word
        err = a.errors[k] + np.linalg.norm(m, 2) * err + rep.errors[k] * np.linalg.norm(word)
    big_m, big_a, big_err = path_cocycle(problem, rep, infinity_path(rep.plan))
    # the loop at infinity is the inverse of the big loop: a_inf = -M_big^-1 a_big
    m_inf = rep.infinity
    a_inf = -np.linalg.solve(big_m, big_a)
    value = a_inf + m_inf @ word
    inv_norm = float(np.linalg.norm(np.linalg.inv(big_m), 2))
    inf_norm = float(np.linalg.norm(m_inf, 2))
    # first order: a_inf through the inverse, M_inf through the product of generators
    err_inf = inv_norm * big_err * (1.0 + float(np.linalg.norm(a_inf)))
    err_m = inf_norm**2 * float(sum(rep.errors)) * float(np.linalg.norm(word))
    return RelationWordCheck(
        word,
        big_a,
        a_inf,
        value,
        float(np.linalg.norm(value)),
        err_inf + inf_norm * err + err_m,
    )
