"""Analytic continuation of linear systems ``y' = A(t) y + b(t)`` along polylines.

The transport along a path is the product of local Taylor steps. At a step
center ``z`` the fundamental matrix of the local problem is expanded as
``Y(z + u) = sum Y_k u^k`` with ``(k + 1) Y_{k+1} = sum_j A_j Y_{k-j}``,
where ``A_j`` are the Taylor coefficients of ``A`` at ``z``. The step length
is at most ``theta`` times the distance from ``z`` to the nearest pole of
the system, so the series converges geometrically.

Inhomogeneous systems are handled by appending a constant coordinate: the
augmented matrix ``[[A, b], [0, 0]]`` is transported with the same code and
its last column is the transport of the zero initial jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import PathTooCloseToSingularity, PrecisionExhausted
from .odeops import DifferentialOperator, RationalFunction, cluster_roots

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ContinuationConfig:
    """Numerical knobs of the Taylor stepper.

    ``clearance`` is an absolute distance; when ``None`` it defaults to
    ``clearance_factor`` times the separation of the singular points.
    """

    theta: float = 0.4
    order_start: int = 24
    order_max: int = 64
    tail_tol: float = 1e-16
    clearance: float | None = None
    clearance_factor: float = 0.1
    max_halvings: int = 40

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "order_start": self.order_start,
            "order_max": self.order_max,
            "tail_tol": self.tail_tol,
            "clearance": self.clearance,
            "clearance_factor": self.clearance_factor,
            "max_halvings": self.max_halvings,
        }


def default_clearance(points: Sequence[complex], factor: float = 0.1) -> float:
    """``factor`` times the minimum distance between the given points.

    With fewer than two points the separation is taken to be
    ``max(1, |s|)`` for the lone point (or 1 when there is none).
    """
    pts = [complex(p) for p in points]
    if len(pts) < 2:
        return factor * (max(1.0, abs(pts[0])) if pts else 1.0)
    sep = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1 :])
    return factor * sep


@dataclass(frozen=True)
class PathPolyline:
    vertices: tuple[complex, ...]
    closed: bool = False

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise ValueError("a path needs at least two vertices")
        for a, b in zip(verts, verts[1:]):
            if a == b:
                raise ValueError(f"consecutive vertices coincide at {a}")
        if self.closed and abs(verts[0] - verts[-1]) > 1e-14 * (1 + abs(verts[0])):
            raise ValueError("a closed path must end at its first vertex")

    @classmethod
    def segment(cls, a: complex, b: complex) -> "PathPolyline":
        return cls((a, b))

    @classmethod
    def polygon(cls, center: complex, radius: float, sides: int = 16, start_angle: float = 0.0, turns: int = 1) -> "PathPolyline":
        """Closed counterclockwise regular polygon (``turns < 0`` for clockwise)."""
        k = np.arange(sides * abs(turns) + 1)
        sign = 1 if turns > 0 else -1
        verts = center + radius * np.exp(1j * (start_angle + sign * 2 * np.pi * k / sides))
        verts[-1] = verts[0]
        return cls(tuple(verts), closed=True)

    @property
    def start(self) -> complex:
        return self.vertices[0]

    @property
    def end(self) -> complex:
        return self.vertices[-1]

    def segments(self):
        return zip(self.vertices, self.vertices[1:])

    def reversed(self) -> "PathPolyline":
        return PathPolyline(self.vertices[::-1], self.closed)

    def then(self, other: "PathPolyline") -> "PathPolyline":
        """Concatenation: this path first, then ``other``."""
        if abs(self.end - other.start) > 1e-12 * (1 + abs(self.end)):
            raise ValueError("paths do not connect")
        verts = self.vertices + other.vertices[1:]
        return PathPolyline(verts, closed=abs(verts[0] - verts[-1]) <= 1e-14 * (1 + abs(verts[0])))

    def length(self) -> float:
        return float(sum(abs(b - a) for a, b in self.segments()))

    def distance_to(self, point: complex) -> float:
        return min(_segment_distance(a, b, point) for a, b in self.segments())

    def min_distance(self, points: Sequence[complex]) -> float:
        if not len(points):
            return math.inf
        return min(self.distance_to(p) for p in points)

    def as_dict(self) -> dict:
        return {"vertices": [[v.real, v.imag] for v in self.vertices], "closed": self.closed}


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    d = b - a
    s = ((p - a) * d.conjugate()).real / (abs(d) ** 2)
    s = min(1.0, max(0.0, s))
    return abs(a + s * d - p)


@dataclass(frozen=True)
class CompanionSystem:
    """First order system ``y' = A y (+ b)``; entries are rational functions.

    For an operator ``sum p_i D^i`` of order ``n`` and ``y = (h, h', ...,
    h^(n-1))`` the matrix has ones on the superdiagonal and last row
    ``-p_i / p_n``; the inhomogeneity is zero except ``g / p_n`` last.
    """

    dimension: int
    entries: tuple[tuple[RationalFunction, ...], ...]
    inhomogeneity: tuple[RationalFunction, ...] | None = None
    poles: tuple[complex, ...] = field(default=())

    @property
    def is_homogeneous(self) -> bool:
        return self.inhomogeneity is None

    def matrix_at(self, t: complex) -> np.ndarray:
        return np.array([[complex(e(t)) for e in row] for row in self.entries], dtype=complex)

    def trace(self) -> RationalFunction:
        out = RationalFunction()
        for i in range(self.dimension):
            out = out + self.entries[i][i]
        return out

    def _augmented(self) -> list[tuple[int, int, RationalFunction]]:
        n = self.dimension
        items = [(i, j, e) for i, row in enumerate(self.entries) for j, e in enumerate(row) if not e.is_zero()]
        if self.inhomogeneity is not None:
            items += [(i, n, b) for i, b in enumerate(self.inhomogeneity) if not b.is_zero()]
        return items

    def series(self, center: complex, order: int) -> np.ndarray:
        """Taylor coefficients ``A_k`` of the (augmented) matrix, shape ``(order, m, m)``."""
        m = self.dimension + (0 if self.inhomogeneity is None else 1)
        out = np.zeros((order, m, m), dtype=complex)
        for i, j, e in self._augmented():
            if e.is_constant():
                out[0, i, j] = e.num.lead if not e.is_zero() else 0
            else:
                out[:, i, j] = e.taylor(center, order)
        return out


def _poles_of(functions: Sequence[RationalFunction]) -> tuple[complex, ...]:
    found: list[complex] = []
    for f in functions:
        if f.den.degree <= 0:
            continue
        for root, _ in cluster_roots(f.den):
            if not any(abs(root - r) <= 1e-8 * (1 + abs(r)) for r in found):
                found.append(root)
    found.sort(key=lambda z: (round(z.real, 10), round(z.imag, 10)))
    return tuple(found)


def companion_system(op: DifferentialOperator, g=None) -> CompanionSystem:
    """First order reduction of ``op h = 0`` (or ``op h = g``)."""
    n = op.order
    if n < 1:
        raise ValueError("companion system needs an operator of order >= 1")
    lead = op.leading
    zero = RationalFunction()
    one = RationalFunction.coerce(1)
    rows = []
    for i in range(n - 1):
        rows.append(tuple(one if j == i + 1 else zero for j in range(n)))
    rows.append(tuple(-(op.coeffs[j] / lead) for j in range(n)))
    inhom = None
    if g is not None:
        g = RationalFunction.coerce(g)
        inhom = tuple([zero] * (n - 1) + [g / lead])
    funcs = [e for row in rows for e in row] + list(inhom or ())
    return CompanionSystem(n, tuple(rows), inhom, _poles_of(funcs))


@dataclass(frozen=True)
class TransferResult:
    matrix: np.ndarray
    particular_shift: np.ndarray
    error_estimate: float
    steps_taken: int
    condition: float = 1.0

    def as_dict(self) -> dict:
        from .report import cmatrix, cvector

        return {
            "matrix": cmatrix(self.matrix),
            "particular_shift": cvector(self.particular_shift),
            "error_estimate": self.error_estimate,
            "steps_taken": self.steps_taken,
            "condition": self.condition,
        }


@dataclass(frozen=True)
class JetVector:
    base: complex
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex).reshape(-1))


def _local_step(series: np.ndarray, h: complex, cfg: ContinuationConfig, order: int):
    """Sum the local fundamental series at step ``h``.

    Returns ``(S, tail, roundoff)`` or ``None`` when the tail bound is not met
    within ``order`` terms.
    """
    m = series.shape[1]
    powers = h ** np.arange(1, order + 1)
    b = series[:order] * powers[:, None, None]
    z = np.zeros((order + 1, m, m), dtype=complex)
    z[0] = np.eye(m)
    norms = np.zeros(order + 1)
    norms[0] = math.sqrt(m)
    total = z[0].copy()
    for k in range(order):
        z[k + 1] = np.einsum("jab,jbc->ac", b[: k + 1], z[k::-1]) / (k + 1)
        total += z[k + 1]
        norms[k + 1] = np.linalg.norm(z[k + 1])
        if not math.isfinite(norms[k + 1]):
            return None
        if k + 1 >= cfg.order_start:
            last = norms[k - 1 : k + 2].max()
            if last <= cfg.tail_tol * max(np.linalg.norm(total), 1.0):
                roundoff = 8 * EPS * m * norms[: k + 2].sum()
                return total, 2 * last, roundoff
    return None


def _propagated_error(total: np.ndarray, local: list[tuple[float, np.ndarray]]) -> float:
    """First order bound ``sum_k |T P_k^-1| delta_k |P_{k-1}|`` plus rounding of the products.

    ``P_k`` is the product of the first ``k`` step matrices and ``T`` the
    full product, so ``T P_k^-1`` is the transport over the remaining steps.
    """
    err = 0.0
    prefixes = [p for _, p in local[1:]] + [total]
    for (delta, before), after in zip(local, prefixes):
        suffix = np.linalg.solve(after.T, total.T).T
        err += np.linalg.norm(suffix, 2) * delta * np.linalg.norm(before, 2)
    m = total.shape[0]
    return err + 4 * EPS * m * len(local) * np.linalg.norm(total, 2)


def transfer(
    system: CompanionSystem,
    path: PathPolyline,
    config: ContinuationConfig | None = None,
    clearance: float | None = None,
) -> TransferResult:
    """Transport the fundamental matrix (and the zero jet, if inhomogeneous) along ``path``."""
    cfg = config or ContinuationConfig()
    poles = np.array(system.poles, dtype=complex)
    if clearance is None:
        clearance = cfg.clearance if cfg.clearance is not None else default_clearance(system.poles, cfg.clearance_factor)
    dist = path.min_distance(poles)
    if dist < clearance:
        raise PathTooCloseToSingularity(
            f"path passes within {dist:.3g} of a singular point (clearance {clearance:.3g})"
        )
    n = system.dimension
    m = n + (0 if system.is_homogeneous else 1)
    total = np.eye(m, dtype=complex)
    # per step: (local error bound, prefix product before the step)
    local: list[tuple[float, np.ndarray]] = []
    for a, b in path.segments():
        z = a
        while True:
            remaining = b - z
            if abs(remaining) <= 1e-15 * (1 + abs(b)):
                break
            radius = np.min(np.abs(poles - z)) if len(poles) else math.inf
            h = remaining if abs(remaining) <= cfg.theta * radius else remaining / abs(remaining) * cfg.theta * radius
            series = system.series(z, cfg.order_max)
            result = None
            for _ in range(cfg.max_halvings + 1):
                result = _local_step(series, h, cfg, cfg.order_max)
                if result is not None:
                    break
                h = h / 2
            if result is None:
                raise PrecisionExhausted(
                    f"tail bound {cfg.tail_tol:g} not reached at order {cfg.order_max} near t = {z}"
                )
            step, tail, roundoff = result
            local.append((tail + roundoff, total))
            total = step @ total
            if not np.all(np.isfinite(total)):
                raise PrecisionExhausted(f"transfer matrix overflowed near t = {z}")
            z = b if h == remaining else z + h
    err = _propagated_error(total, local)
    steps = len(local)
    mat = total[:n, :n]
    shift = total[:n, n] if m > n else np.zeros(n, dtype=complex)
    cond = float(np.linalg.cond(mat))
    return TransferResult(mat, shift, float(err), steps, cond)


def transport_jet(
    system: CompanionSystem,
    path: PathPolyline,
    init: JetVector | Sequence[complex],
    config: ContinuationConfig | None = None,
    clearance: float | None = None,
) -> JetVector:
    """Continue the solution with initial jet ``init`` (at the path start) to the path end."""
    if isinstance(init, JetVector):
        if abs(init.base - path.start) > 1e-12 * (1 + abs(path.start)):
            raise ValueError("initial jet is not based at the start of the path")
        values = init.values
    else:
        values = np.asarray(init, dtype=complex)
    if len(values) != system.dimension:
        raise ValueError(f"jet has length {len(values)}, system has dimension {system.dimension}")
    res = transfer(system, path, config, clearance)
    return JetVector(path.end, res.matrix @ values + res.particular_shift)
