"""Rational functions in one variable with canonical (reduced, monic-denominator) form."""

from __future__ import annotations

from fractions import Fraction
from numbers import Number

import numpy as np
from scipy.signal import lfilter

from ..errors import ZeroFunction
from .polynomial import Polynomial, as_polynomial, format_poly

GCD_TOL = 1e-12
VALUATION_TOL = 1e-9


def _common_root_power(num: Polynomial, root: complex, limit: int, tol: float) -> int:
    shifted = num.taylor_shift(root)
    scale = np.max(np.abs(shifted))
    k = 0
    while k < limit and k < len(shifted) - 1 and abs(shifted[k]) <= tol * scale:
        k += 1
    return k


def canonicalize(num: Polynomial, den: Polynomial, tol: float = GCD_TOL) -> tuple[Polynomial, Polynomial]:
    """Remove approximate common factors and make the denominator monic."""
    if den.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if num.is_zero():
        return Polynomial(), Polynomial([1])
    if den.degree > 0 and num.degree > 0:
        for root, mult in den.root_clusters():
            k = _common_root_power(num, root, mult, tol)
            if k:
                num = num.deflate(root, k)
                den = den.deflate(root, k)
    lead = den.lead
    return Polynomial._wrap(num.coeffs / lead), Polynomial._wrap(den.coeffs / lead)


class RationalFunction:
    """Quotient ``numerator / denominator`` of two polynomials.

    The constructor canonicalizes unless ``reduced=True`` is passed for a pair
    already known to be coprime with monic denominator.
    """

    __slots__ = ("num", "den")

    def __init__(self, numerator=None, denominator=None, *, reduced: bool = False):
        num = Polynomial() if numerator is None else as_polynomial(numerator)
        den = Polynomial([1]) if denominator is None else as_polynomial(denominator)
        if not reduced:
            num, den = canonicalize(num, den)
        self.num = num
        self.den = den

    @classmethod
    def coerce(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return cls(value, Polynomial([1]), reduced=True)
        return cls(Polynomial([value]), Polynomial([1]), reduced=True)

    @classmethod
    def variable(cls) -> "RationalFunction":
        return cls.coerce(Polynomial.variable())

    # -- queries -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def is_constant(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def poles(self) -> list[tuple[complex, int]]:
        return self.den.root_clusters() if self.den.degree > 0 else []

    def zeros(self) -> list[tuple[complex, int]]:
        return self.num.root_clusters() if self.num.degree > 0 else []

    def degree_at_infinity(self) -> int:
        """deg(num) - deg(den); a positive value is a pole order at infinity."""
        return self.num.degree - self.den.degree

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, (RationalFunction, Polynomial, Number, Fraction)):
            return NotImplemented
        o = RationalFunction.coerce(other)
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        if self.den.degree == o.den.degree and self.den.allclose(o.den, rtol=1e-14, atol=0.0):
            return RationalFunction(self.num + o.num, self.den)
        if o.den.degree == 0:
            return RationalFunction(self.num + o.num * self.den, self.den)
        if self.den.degree == 0:
            return RationalFunction(self.num * o.den + o.num, o.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        if not isinstance(other, (RationalFunction, Polynomial, Number, Fraction)):
            return NotImplemented
        return self + (-RationalFunction.coerce(other))

    def __rsub__(self, other):
        return RationalFunction.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (RationalFunction, Polynomial, Number, Fraction)):
            return NotImplemented
        o = RationalFunction.coerce(other)
        if self.is_zero() or o.is_zero():
            return RationalFunction()
        if self.den.degree == 0 and o.den.degree == 0:
            return RationalFunction(self.num * o.num, Polynomial([1]), reduced=True)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroFunction("cannot invert the zero function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, (RationalFunction, Polynomial, Number, Fraction)):
            return NotImplemented
        return self * RationalFunction.coerce(other).inverse()

    def __rtruediv__(self, other):
        return RationalFunction.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = RationalFunction.coerce(1)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self) -> "RationalFunction":
        if self.den.degree == 0:
            return RationalFunction(self.num.derivative(), self.den, reduced=True)
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def reciprocal_substitution(self) -> "RationalFunction":
        """The function ``s -> f(1/s)``."""
        dn, dd = self.num.degree, self.den.degree
        if self.is_zero():
            return RationalFunction()
        num = self.num.reversed()
        den = self.den.reversed()
        shift = dd - dn
        if shift >= 0:
            num = num * Polynomial([0] * shift + [1])
        else:
            den = den * Polynomial([0] * (-shift) + [1])
        return RationalFunction(num, den)

    # -- local expansions ---------------------------------------------
    def taylor(self, center: complex, order: int) -> np.ndarray:
        """First ``order`` Taylor coefficients at a point where the function is regular."""
        num = self.num.taylor_shift(center)
        den = self.den.taylor_shift(center)
        if not len(num):
            return np.zeros(order, dtype=complex)
        impulse = np.zeros(order, dtype=complex)
        impulse[0] = 1.0
        return lfilter(num, den, impulse)

    def laurent(self, center: complex, order: int, tol: float = VALUATION_TOL) -> tuple[int, np.ndarray]:
        """Laurent expansion at ``center``: returns ``(v, c)`` with ``f = sum c[k] (t-center)^(v+k)``."""
        if self.is_zero():
            raise ZeroFunction("zero function has no Laurent expansion")
        num = self.num.taylor_shift(center)
        den = self.den.taylor_shift(center)
        vn = _valuation(num, tol)
        vd = _valuation(den, tol)
        impulse = np.zeros(order, dtype=complex)
        impulse[0] = 1.0
        return vn - vd, lfilter(num[vn:], den[vd:], impulse)

    def valuation_at(self, center: complex, tol: float = VALUATION_TOL) -> int:
        """Order of vanishing at ``center`` (negative for a pole)."""
        return _valuation(self.num.taylor_shift(center), tol) - _valuation(self.den.taylor_shift(center), tol)

    def allclose(self, other, rtol: float = 1e-9) -> bool:
        o = RationalFunction.coerce(other)
        lhs = self.num * o.den
        rhs = o.num * self.den
        scale = max(self.num.norm() * o.den.norm(), o.num.norm() * self.den.norm(), 1e-300)
        diff = lhs - rhs
        return diff.is_zero() or diff.norm() <= rtol * scale

    def __repr__(self) -> str:
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __str__(self) -> str:
        if self.den.degree == 0:
            return format_poly(self.num * (1 / self.den.lead))
        return f"({format_poly(self.num)})/({format_poly(self.den)})"


def _valuation(shifted: np.ndarray, tol: float) -> int:
    scale = np.max(np.abs(shifted)) if len(shifted) else 0.0
    v = 0
    while v < len(shifted) - 1 and abs(shifted[v]) <= tol * scale:
        v += 1
    return v
