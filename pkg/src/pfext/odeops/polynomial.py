"""Dense univariate polynomials with complex floating point coefficients."""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from ..errors import RootIsolationFailure

# Relative size below which a coefficient produced by cancellation is treated as zero.
CANCEL_TOL = 1e-14
# Distance (relative) below which computed roots are always merged into one cluster.
CLUSTER_TOL = 1e-8
# Candidate radius for multiple-root clusters; eigenvalues of a root of multiplicity m
# scatter like eps**(1/m), so candidates are merged only after a residual test.
CANDIDATE_RADIUS = 1e-3
RESIDUAL_TOL = 1e-10


def to_complex(value) -> complex:
    """Convert an int, Fraction, float or complex (or a pair of exact parts) to complex."""
    if isinstance(value, tuple) and len(value) == 2:
        return complex(float(Fraction(value[0])), float(Fraction(value[1])))
    if isinstance(value, Fraction):
        return complex(float(value))
    if isinstance(value, Number):
        return complex(value)
    if isinstance(value, np.generic):
        return complex(value)
    raise TypeError(f"cannot use {value!r} as a coefficient")


def _trim(c: np.ndarray, scale: float = 0.0) -> np.ndarray:
    cut = CANCEL_TOL * scale
    n = len(c)
    while n and abs(c[n - 1]) <= cut:
        n -= 1
    return c[:n]


class Polynomial:
    """Polynomial ``sum(c[k] * t**k)``; the zero polynomial has no coefficients.

    Instances are immutable. Coefficients may be given as ints, Fractions,
    floats, complex numbers or ``(re, im)`` pairs of exact rationals; they
    are stored as ``complex128``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        if isinstance(coeffs, np.ndarray):
            c = np.array(coeffs, dtype=complex)
        else:
            c = np.array([to_complex(x) for x in coeffs], dtype=complex)
        c = _trim(c)
        c.setflags(write=False)
        self._c = c

    @classmethod
    def _wrap(cls, c: np.ndarray, scale: float = 0.0) -> "Polynomial":
        p = object.__new__(cls)
        c = np.array(_trim(np.asarray(c, dtype=complex), scale))
        c.setflags(write=False)
        p._c = c
        return p

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls([value])

    @classmethod
    def variable(cls) -> "Polynomial":
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Polynomial":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, np.array([-r, 1.0], dtype=complex))
        return cls._wrap(c)

    # -- basic queries -------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return len(self._c) == 0

    @property
    def lead(self) -> complex:
        return complex(self._c[-1]) if len(self._c) else 0j

    def norm(self) -> float:
        return float(np.max(np.abs(self._c))) if len(self._c) else 0.0

    def __call__(self, z):
        if not len(self._c):
            return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
        return np.polyval(self._c[::-1], z)

    def abs_scale(self, z: complex) -> float:
        """Evaluation scale ``sum |c_k| |z|^k``, used for relative residuals."""
        if not len(self._c):
            return 0.0
        return float(np.polyval(np.abs(self._c[::-1]), abs(z)))

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other])

    def __add__(self, other):
        if not isinstance(other, (Polynomial, Number, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        n = max(len(self._c), len(o._c))
        c = np.zeros(n, dtype=complex)
        c[: len(self._c)] += self._c
        c[: len(o._c)] += o._c
        return Polynomial._wrap(c, max(self.norm(), o.norm()))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._wrap(-self._c)

    def __sub__(self, other):
        if not isinstance(other, (Polynomial, Number, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero() or other.is_zero():
                return Polynomial()
            return Polynomial._wrap(np.convolve(self._c, other._c))
        if isinstance(other, (Number, Fraction)):
            return Polynomial._wrap(self._c * to_complex(other))
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Polynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def derivative(self, k: int = 1) -> "Polynomial":
        c = self._c
        for _ in range(k):
            if len(c) <= 1:
                return Polynomial()
            c = c[1:] * np.arange(1, len(c))
        return Polynomial._wrap(c)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        num = self._c.copy()
        d = other._c
        if len(num) < len(d):
            return Polynomial(), self
        q = np.zeros(len(num) - len(d) + 1, dtype=complex)
        for k in range(len(q) - 1, -1, -1):
            q[k] = num[k + len(d) - 1] / d[-1]
            num[k : k + len(d)] -= q[k] * d
        return Polynomial._wrap(q), Polynomial._wrap(num[: len(d) - 1], self.norm())

    def exact_quotient(self, other: "Polynomial") -> "Polynomial":
        """Quotient of a division known to be exact; the remainder is discarded."""
        return self.divmod(other)[0]

    def deflate(self, root: complex, times: int = 1) -> "Polynomial":
        """Divide by ``(t - root)**times`` via synthetic division, dropping remainders."""
        c = self._c
        for _ in range(times):
            if len(c) <= 1:
                return Polynomial([1]) if len(c) else Polynomial()
            q = np.zeros(len(c) - 1, dtype=complex)
            acc = 0j
            for k in range(len(c) - 1, 0, -1):
                acc = c[k] + acc * root
                q[k - 1] = acc
            c = q
        return Polynomial._wrap(c)

    def monic(self) -> "Polynomial":
        return Polynomial._wrap(self._c / self._c[-1])

    def taylor_shift(self, center: complex) -> np.ndarray:
        """Coefficients of ``p(center + u)`` as a polynomial in ``u``."""
        c = np.array(self._c, dtype=complex)
        n = len(c)
        for i in range(n - 1):
            for k in range(n - 2, i - 1, -1):
                c[k] += center * c[k + 1]
        return c

    def reversed(self, degree: int | None = None) -> "Polynomial":
        """``t**degree * p(1/t)``; ``degree`` defaults to the degree of p."""
        d = self.degree if degree is None else degree
        c = np.zeros(d + 1, dtype=complex)
        c[d - self.degree : d + 1] = self._c[::-1]
        return Polynomial._wrap(c)

    def multiplicity_at(self, z: complex, tol: float = 1e-9) -> int:
        """Number of vanishing Taylor coefficients of ``p`` at ``z``."""
        if self.is_zero():
            raise ValueError("zero polynomial has infinite multiplicity")
        shifted = self.taylor_shift(z)
        scale = np.max(np.abs(shifted))
        m = 0
        while m < len(shifted) - 1 and abs(shifted[m]) <= tol * scale:
            m += 1
        return m

    def allclose(self, other: "Polynomial", rtol: float = 1e-10, atol: float = 1e-12) -> bool:
        n = max(len(self._c), len(other._c))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        scale = max(self.norm(), other.norm())
        return bool(np.all(np.abs(a - b) <= atol + rtol * scale))

    def roots(self) -> np.ndarray:
        return polish_roots(self, companion_roots(self))

    def root_clusters(self) -> list[tuple[complex, int]]:
        return cluster_roots(self)

    def __repr__(self) -> str:
        return f"Polynomial({[complex(x) for x in self._c]})"

    def __str__(self) -> str:
        return format_poly(self)


def format_number(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) <= 1e-15 * max(1.0, abs(z.real)):
        return f"{z.real:.12g}"
    if abs(z.real) <= 1e-15 * max(1.0, abs(z.imag)):
        return f"{z.imag:.12g}*i"
    return f"({z.real:.12g}{z.imag:+.12g}*i)"


def format_poly(p: Polynomial, var: str = "t") -> str:
    if p.is_zero():
        return "0"
    terms = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            terms.append(format_number(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"{format_number(c)}*{mono}")
    return " + ".join(terms)


def companion_roots(p: Polynomial) -> np.ndarray:
    """Eigenvalues of the companion matrix of ``p``."""
    n = p.degree
    if n <= 0:
        return np.zeros(0, dtype=complex)
    c = p.coeffs / p.coeffs[-1]
    if n == 1:
        return np.array([-c[0]], dtype=complex)
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1]
    return np.linalg.eigvals(comp)


def polish_roots(p: Polynomial, roots: np.ndarray, iters: int = 8) -> np.ndarray:
    """Newton-polish simple roots; a step is kept only if it lowers the residual."""
    dp = p.derivative()
    out = np.array(roots, dtype=complex)
    for k, z in enumerate(out):
        best, res = z, abs(p(z))
        for _ in range(iters):
            d = dp(z)
            if d == 0:
                break
            z = z - p(z) / d
            r = abs(p(z))
            if not np.isfinite(r) or r >= res:
                break
            best, res = z, r
        out[k] = best
    return out


def _validated(p: Polynomial, center: complex, m: int, tol: float) -> bool:
    for j in range(m):
        dj = p.derivative(j)
        scale = dj.abs_scale(center)
        if scale and abs(dj(center)) > tol * scale:
            return False
    return True


def _refine_center(p: Polynomial, center: complex, m: int) -> complex:
    # the cluster center is a simple root of the (m-1)-th derivative
    q = p.derivative(m - 1)
    return complex(polish_roots(q, np.array([center]))[0])


def _link_groups(pts: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-link groups of points closer than ``radius`` (relative)."""
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(pts[i] - pts[j]) <= radius * (1 + abs(pts[i])):
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [pts[g] for g in groups.values()]


def _split_clusters(
    p: Polynomial, pts: np.ndarray, radius: float, cluster_tol: float, residual_tol: float
) -> list[tuple[complex, int]]:
    """Validate each candidate group as a multiple root; retry failures at a tenth of the radius."""
    out: list[tuple[complex, int]] = []
    for group in _link_groups(pts, radius):
        m = len(group)
        if m == 1:
            out.append((complex(group[0]), 1))
            continue
        center = complex(np.mean(group))
        refined = _refine_center(p, center, m)
        if abs(refined - center) > radius * (1 + abs(center)):
            refined = center
        if _validated(p, refined, m, residual_tol):
            out.append((refined, m))
        elif radius / 10 >= cluster_tol:
            out.extend(_split_clusters(p, group, radius / 10, cluster_tol, residual_tol))
        else:
            out.extend((complex(z), 1) for z in group)
    return out


def cluster_roots(
    p: Polynomial,
    cluster_tol: float = CLUSTER_TOL,
    candidate_radius: float = CANDIDATE_RADIUS,
    residual_tol: float = RESIDUAL_TOL,
) -> list[tuple[complex, int]]:
    """Distinct roots of ``p`` with multiplicities.

    Computed roots within ``candidate_radius`` (relative) of each other form
    a candidate group of size ``m``, accepted as an ``m``-fold root if its
    refined center is a root of ``p`` and of its first ``m - 1``
    derivatives up to ``residual_tol``. Rejected groups are regrouped at a
    tenth of the radius, down to ``cluster_tol``. Distinct roots left closer
    than ``cluster_tol`` raise RootIsolationFailure. Clusters are returned
    sorted by (real, imag).
    """
    raw = p.roots()
    if len(raw) == 0:
        return []
    order = np.lexsort((raw.imag, raw.real))
    clusters = _split_clusters(p, raw[order], candidate_radius, cluster_tol, residual_tol)
    clusters.sort(key=lambda cm: (round(cm[0].real, 12), round(cm[0].imag, 12)))
    for (a, _), (b, _) in zip(clusters, clusters[1:]):
        if abs(a - b) <= cluster_tol * (1 + abs(a)):
            raise RootIsolationFailure(
                f"roots {a} and {b} cannot be separated at working precision"
            )
    return clusters


def as_polynomial(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, Sequence) and not isinstance(value, tuple):
        return Polynomial(value)
    return Polynomial([value])
