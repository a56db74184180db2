"""Singular points, the Fuchs criterion and indicial exponents."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ..errors import IrregularPoint
from .operator import DifferentialOperator, normalize, pullback_to_infinity
from .polynomial import Polynomial, cluster_roots

INFINITY = "infinity"
Location = Union[complex, str]

SAME_POINT_TOL = 1e-8


def is_infinity(location: Location) -> bool:
    return isinstance(location, str) and location == INFINITY


@dataclass(frozen=True)
class SingularPoint:
    """A point of the Riemann sphere examined for an operator.

    ``kind`` is ``"singular"`` for a genuine singular point, ``"ordinary"``
    for an ordinary point (used for the infinity marker), and ``"puncture"``
    for a point removed from the base because another object (an
    inhomogeneity) is singular there while the operator is not.
    """

    location: Location
    is_regular: bool
    exponents: tuple[complex, ...]
    exponent_multiplicities: tuple[int, ...] = ()
    root_multiplicity: int = 0
    kind: str = "singular"

    @property
    def is_infinite(self) -> bool:
        return is_infinity(self.location)

    @property
    def exponent_multiset(self) -> list[complex]:
        out = []
        for e, m in zip(self.exponents, self.exponent_multiplicities):
            out.extend([e] * m)
        return out


@dataclass(frozen=True)
class SingularityProfile:
    operator: DifferentialOperator
    points: tuple[SingularPoint, ...]
    separation: float = field(default=math.inf)

    @property
    def finite_points(self) -> tuple[SingularPoint, ...]:
        return tuple(p for p in self.points if not p.is_infinite)

    @property
    def finite_locations(self) -> np.ndarray:
        return np.array([p.location for p in self.finite_points], dtype=complex)

    @property
    def infinity(self) -> SingularPoint:
        return next(p for p in self.points if p.is_infinite)

    def point_at(self, location: Location) -> SingularPoint:
        for p in self.points:
            if is_infinity(location) and p.is_infinite:
                return p
            if not is_infinity(location) and not p.is_infinite and abs(p.location - location) <= SAME_POINT_TOL * (1 + abs(location)):
                return p
        raise KeyError(location)

    def with_punctures(self, locations: Sequence[complex]) -> "SingularityProfile":
        """Add points where the operator is ordinary but the base is punctured."""
        n = self.operator.order
        pts = list(self.finite_points)
        for z in locations:
            if any(abs(p.location - z) <= SAME_POINT_TOL * (1 + abs(z)) for p in pts):
                continue
            pts.append(
                SingularPoint(complex(z), True, tuple(complex(k) for k in range(n)), (1,) * n, 0, "puncture")
            )
        pts.sort(key=_sort_key)
        return SingularityProfile(self.operator, tuple(pts) + (self.infinity,), separation_of([p.location for p in pts]))

    @property
    def fuchsian(self) -> bool:
        return all(p.is_regular for p in self.points)


def _sort_key(p: SingularPoint):
    z = complex(p.location)
    return (round(z.real, 10), round(z.imag, 10))


def separation_of(locations: Sequence[complex]) -> float:
    locs = list(locations)
    best = math.inf
    for i in range(len(locs)):
        for j in range(i + 1, len(locs)):
            best = min(best, abs(locs[i] - locs[j]))
    return best


def _falling(k: int) -> Polynomial:
    """The falling factorial ``r (r-1) ... (r-k+1)`` as a polynomial in ``r``."""
    p = Polynomial([1])
    for j in range(k):
        p = p * Polynomial([-j, 1])
    return p


def _pole_orders(op: DifferentialOperator, z: complex) -> list[int | None]:
    """Pole order of ``p_i / p_n`` at ``z`` for each ``i < n`` (None for zero coefficients)."""
    lead = op.leading
    out: list[int | None] = []
    for c in op.coeffs[:-1]:
        if c.is_zero():
            out.append(None)
        else:
            out.append(-(c / lead).valuation_at(z))
    return out


def _is_regular_at(op: DifferentialOperator, z: complex) -> bool:
    n = op.order
    return all(k is None or k <= n - i for i, k in enumerate(_pole_orders(op, z)))


def indicial_polynomial(op: DifferentialOperator, z: complex) -> Polynomial:
    """Indicial polynomial at a finite point where ``op`` is regular singular or ordinary."""
    n = op.order
    lead = op.leading
    poly = _falling(n)
    for i, c in enumerate(op.coeffs[:-1]):
        if c.is_zero():
            continue
        v, series = (c / lead).laurent(z, n + 1)
        # coefficient of (t - z)^(i - n); a lower valuation breaks the Fuchs bound
        if v < i - n:
            raise IrregularPoint(f"Fuchs criterion fails at t = {z}")
        if v == i - n:
            poly = poly + _falling(i) * complex(series[0])
    return poly


def _exponents(op: DifferentialOperator, z: complex) -> tuple[tuple[complex, ...], tuple[int, ...]]:
    poly = indicial_polynomial(op, z)
    clusters = cluster_roots(poly)
    clusters.sort(key=lambda cm: (round(cm[0].real, 9), round(cm[0].imag, 9)))
    return tuple(_clean(e) for e, _ in clusters), tuple(m for _, m in clusters)


def _clean(z: complex, tol: float = 1e-13) -> complex:
    re = 0.0 if abs(z.real) < tol else z.real
    im = 0.0 if abs(z.imag) < tol else z.imag
    return complex(re, im)


def _analyze_point(op: DifferentialOperator, z: complex, mult: int, kind: str = "singular") -> SingularPoint:
    if _is_regular_at(op, z):
        ex, mu = _exponents(op, z)
        return SingularPoint(complex(z), True, ex, mu, mult, kind)
    return SingularPoint(complex(z), False, (), (), mult, kind)


def _finite_singular_locations(op: DifferentialOperator) -> list[tuple[complex, int]]:
    norm = normalize(op.coeffs)
    lead = norm.leading.num
    return cluster_roots(lead) if lead.degree > 0 else []


def _analyze_infinity(op: DifferentialOperator) -> SingularPoint:
    pulled = normalize(pullback_to_infinity(op).coeffs)
    lead = pulled.leading.num
    mult = lead.multiplicity_at(0.0) if lead.degree > 0 else 0
    singular = mult > 0
    if not _is_regular_at(pulled, 0.0):
        return SingularPoint(INFINITY, False, (), (), mult, "singular")
    ex, mu = _exponents(pulled, 0.0)
    return SingularPoint(INFINITY, True, ex, mu, mult, "singular" if singular else "ordinary")


def singularities(op: DifferentialOperator) -> SingularityProfile:
    """Singular points of ``op`` including the point at infinity."""
    if op.order < 1:
        raise ValueError("singularity analysis needs an operator of order >= 1")
    norm = normalize(op.coeffs)
    pts = [_analyze_point(norm, _clean(z), m) for z, m in _finite_singular_locations(norm)]
    pts.sort(key=_sort_key)
    pts.append(_analyze_infinity(norm))
    return SingularityProfile(norm, tuple(pts), separation_of([p.location for p in pts if not p.is_infinite]))


def indicial_exponents(op: DifferentialOperator, point: SingularPoint | Location) -> list[complex]:
    """Indicial roots (with multiplicity) at a point; ``0..n-1`` at an ordinary point."""
    if op.order < 1:
        raise ValueError("indicial analysis needs an operator of order >= 1")
    location = point.location if isinstance(point, SingularPoint) else point
    norm = normalize(op.coeffs)
    if is_infinity(location):
        norm = normalize(pullback_to_infinity(norm).coeffs)
        z = 0.0
    else:
        z = complex(location)
    lead = norm.leading.num
    if lead.degree <= 0 or abs(lead(z)) > 1e-9 * lead.abs_scale(z):
        return [complex(k) for k in range(norm.order)]
    if not _is_regular_at(norm, z):
        raise IrregularPoint(f"Fuchs criterion fails at {location}")
    ex, mu = _exponents(norm, z)
    return [e for e, m in zip(ex, mu) for _ in range(m)]


@dataclass(frozen=True)
class FuchsianReport:
    points: tuple[tuple[Location, bool], ...]
    fuchsian: bool


def fuchsian_check(op: DifferentialOperator) -> FuchsianReport:
    """Regularity flag per singular point (infinity included) and the overall verdict."""
    profile = singularities(op)
    pts = tuple((p.location, p.is_regular) for p in profile.points if p.kind != "ordinary")
    return FuchsianReport(pts, all(flag for _, flag in pts))


