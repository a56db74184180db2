"""Linear differential operators ``sum p_i(t) (d/dt)^i`` with rational coefficients."""

from __future__ import annotations

from math import comb
from typing import Iterable, Sequence

from ..errors import AllCoefficientsZero, ZeroFunction
from .polynomial import Polynomial, cluster_roots
from .rational import RationalFunction


class DifferentialOperator:
    """Immutable operator; ``coeffs[i]`` multiplies ``(d/dt)^i``.

    Trailing zero coefficients are dropped, so ``coeffs[-1]`` is the nonzero
    leading coefficient. The zero operator is rejected.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [RationalFunction.coerce(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        if not cs:
            raise AllCoefficientsZero("every coefficient of the operator is zero")
        self.coeffs: tuple[RationalFunction, ...] = tuple(cs)

    @classmethod
    def derivation(cls) -> "DifferentialOperator":
        return cls([0, 1])

    @classmethod
    def multiplication(cls, f) -> "DifferentialOperator":
        return cls([f])

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> RationalFunction:
        return self.coeffs[-1]

    def coefficient(self, i: int) -> RationalFunction:
        return self.coeffs[i] if i < len(self.coeffs) else RationalFunction()

    def __add__(self, other):
        o = _as_operator(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return _operator_or_zero([self.coefficient(i) + o.coefficient(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return DifferentialOperator([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_operator(other))

    def __rsub__(self, other):
        return _as_operator(other) - self

    def __mul__(self, other):
        return compose(self, _as_operator(other))

    def __rmul__(self, other):
        return compose(_as_operator(other), self)

    def scale(self, f) -> "DifferentialOperator":
        """Left multiplication by a function."""
        f = RationalFunction.coerce(f)
        return DifferentialOperator([f * c for c in self.coeffs])

    def monic_ratios(self) -> list[RationalFunction]:
        """``p_i / p_n`` for ``i = 0..n``."""
        lead = self.leading
        return [c / lead for c in self.coeffs]

    def allclose(self, other: "DifferentialOperator", rtol: float = 1e-9, up_to_unit: bool = False) -> bool:
        """Coefficientwise comparison; with ``up_to_unit`` the operators are
        compared after dividing by their leading coefficients."""
        if self.order != other.order:
            return False
        if up_to_unit:
            return all(a.allclose(b, rtol) for a, b in zip(self.monic_ratios(), other.monic_ratios()))
        return all(a.allclose(b, rtol) for a, b in zip(self.coeffs, other.coeffs))

    def apply(self, f: RationalFunction) -> RationalFunction:
        """Apply the operator to a rational function."""
        f = RationalFunction.coerce(f)
        out = RationalFunction()
        deriv = f
        for i, c in enumerate(self.coeffs):
            if i:
                deriv = deriv.derivative()
            out = out + c * deriv
        return out

    def __repr__(self) -> str:
        return f"DifferentialOperator({list(self.coeffs)!r})"

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            d = "" if i == 0 else ("D" if i == 1 else f"D^{i}")
            parts.append(f"({c})" + (f"*{d}" if d else ""))
        return " + ".join(parts)


def _operator_or_zero(coeffs: Sequence[RationalFunction]) -> DifferentialOperator:
    try:
        return DifferentialOperator(coeffs)
    except AllCoefficientsZero:
        raise AllCoefficientsZero("operator arithmetic produced the zero operator") from None


def _as_operator(value) -> DifferentialOperator:
    if isinstance(value, DifferentialOperator):
        return value
    return DifferentialOperator([value])


def _lcm(polys: Sequence[Polynomial]) -> Polynomial:
    mult: dict[complex, int] = {}
    for p in polys:
        if p.degree <= 0:
            continue
        for root, m in cluster_roots(p):
            match = next((r for r in mult if abs(r - root) <= 1e-8 * (1 + abs(r))), None)
            if match is None:
                mult[root] = m
            else:
                mult[match] = max(mult[match], m)
    roots = [r for r, m in mult.items() for _ in range(m)]
    return Polynomial.from_roots(roots)


def _content(polys: Sequence[Polynomial]) -> Polynomial:
    nonzero = [p for p in polys if not p.is_zero()]
    base = min(nonzero, key=lambda p: p.degree)
    if base.degree <= 0:
        return Polynomial([1])
    roots = []
    for root, m in cluster_roots(base):
        k = min(p.multiplicity_at(root, tol=1e-12) for p in nonzero)
        k = min(k, m)
        roots.extend([root] * k)
    return Polynomial.from_roots(roots)


def normalize(raw: Sequence) -> DifferentialOperator:
    """Canonical polynomial-coefficient form of an operator.

    Denominators are cleared, the polynomial content of the coefficients is
    divided out when none of them vanishes identically, and the result is
    scaled so that the leading coefficient of ``p_n`` is 1.
    """
    if not len(raw):
        raise ValueError("operator coefficient list is empty")
    cs = [RationalFunction.coerce(c) for c in raw]
    if all(c.is_zero() for c in cs):
        raise AllCoefficientsZero("every coefficient of the operator is zero")
    while cs[-1].is_zero():
        cs.pop()
    lcm = _lcm([c.den for c in cs])
    polys = [c.num * lcm.exact_quotient(c.den) if not c.is_zero() else Polynomial() for c in cs]
    # a zero coefficient keeps the operator as given (``t D`` stays ``t D``)
    content = _content(polys) if all(not p.is_zero() for p in polys) else Polynomial([1])
    if content.degree > 0:
        polys = [p.exact_quotient(content) if not p.is_zero() else p for p in polys]
    lead = polys[-1].lead
    return DifferentialOperator([RationalFunction(p * (1 / lead), Polynomial([1]), reduced=True) for p in polys])


def compose(left: DifferentialOperator, right: DifferentialOperator) -> DifferentialOperator:
    """Operator product ``left o right`` using ``(d/dt)^i b = sum_k C(i,k) b^(k) (d/dt)^(i-k)``."""
    max_i = left.order
    derivs: list[list[RationalFunction]] = []
    for b in right.coeffs:
        chain = [b]
        for _ in range(max_i):
            chain.append(chain[-1].derivative())
        derivs.append(chain)
    out = [RationalFunction() for _ in range(left.order + right.order + 1)]
    for i, a in enumerate(left.coeffs):
        if a.is_zero():
            continue
        for j, chain in enumerate(derivs):
            for k in range(i + 1):
                bk = chain[k]
                if bk.is_zero():
                    continue
                out[i - k + j] = out[i - k + j] + a * bk * comb(i, k)
    return _operator_or_zero(out)


def dlog(g) -> RationalFunction:
    """Logarithmic derivative ``g'/g`` in canonical form."""
    g = RationalFunction.coerce(g)
    if g.is_zero():
        raise ZeroFunction("dlog of the zero function")
    num, den = g.num, g.den
    return RationalFunction(num.derivative() * den - num * den.derivative(), num * den)


def pullback_to_infinity(op: DifferentialOperator) -> DifferentialOperator:
    """Rewrite ``op`` in the coordinate ``s = 1/t``.

    Uses ``d/dt = -s^2 d/ds``; the result is an operator in ``s`` whose
    solutions are ``s -> y(1/s)`` for solutions ``y`` of ``op``. It is not
    normalized, so ``d/dt`` maps to ``-s^2 d/ds``.
    """
    if op.order < 1:
        raise ValueError("pullback needs an operator of order >= 1")
    theta = DifferentialOperator([0, Polynomial([0, 0, -1])])
    power = DifferentialOperator([1])
    total = None
    for c in op.coeffs:
        if not c.is_zero():
            term = compose(DifferentialOperator([c.reciprocal_substitution()]), power)
            total = term if total is None else total + term
        power = compose(theta, power)
    return total
