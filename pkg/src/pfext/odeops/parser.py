"""Parser for the operator text syntax.

Expressions are built from rational literals (``3``, ``1/4``, ``0.25``), the
variable ``t``, the derivation ``D`` and the imaginary unit ``i`` (or ``I``),
combined with ``+ - * / ^`` (``**`` is accepted for ``^``) and parentheses.
Juxtaposition such as ``2t`` or ``(1-t)D`` means multiplication.

Products are operator compositions, so ``D*t`` evaluates to ``t*D + 1``.
``x / f`` composes ``x`` with multiplication by ``1/f`` and requires ``f``
to be free of ``D``. Literals are read exactly (``fractions.Fraction``)
before conversion to floating point coefficients.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import AllCoefficientsZero, ParseError
from .operator import DifferentialOperator, compose
from .polynomial import Polynomial
from .rational import RationalFunction

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|(\*\*|[-+*/^()])|([A-Za-z_]\w*))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos} in {text!r}")
        num, op, name = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif op is not None:
            tokens.append(("op", "^" if op == "**" else op))
        else:
            tokens.append(("name", name))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, variable: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variable = variable

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, tok = self.take()
        if tok != value:
            raise ParseError(f"expected {value!r} in {self.text!r}, got {tok!r}")

    def parse(self) -> DifferentialOperator:
        if not self.tokens:
            raise ParseError("empty expression")
        value = self.expr()
        if self.pos != len(self.tokens):
            raise ParseError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            value = _add(value, rhs) if op == "+" else _add(value, _neg(rhs))
        return value

    def _starts_factor(self) -> bool:
        kind, tok = self.peek()
        return kind in ("num", "name") or tok == "("

    def term(self):
        value = self.unary()
        while True:
            kind, tok = self.peek()
            if tok == "*":
                self.take()
                value = _mul(value, self.unary())
            elif tok == "/":
                self.take()
                value = _div(value, self.unary(), self.text)
            elif self._starts_factor():
                value = _mul(value, self.power())
            else:
                return value

    def unary(self):
        kind, tok = self.peek()
        if tok == "-":
            self.take()
            return _neg(self.unary())
        if tok == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, tok = self.take()
            if kind != "num" or not tok.isdigit():
                raise ParseError(f"exponent must be an integer literal in {self.text!r}")
            return _pow(base, sign * int(tok), self.text)
        return base

    def primary(self):
        kind, tok = self.take()
        if kind == "num":
            return Fraction(tok)
        if kind == "name":
            if tok == self.variable:
                return RationalFunction.coerce(Polynomial.variable())
            if tok == "D":
                return DifferentialOperator.derivation()
            if tok in ("i", "I"):
                return RationalFunction.coerce(Polynomial([(0, 1)]))
            raise ParseError(f"unknown name {tok!r} in {self.text!r}")
        if tok == "(":
            value = self.expr()
            self.expect(")")
            return value
        raise ParseError(f"unexpected token {tok!r} in {self.text!r}")


# values are Fractions, RationalFunctions or DifferentialOperators; the first
# two stay scalar until a D forces promotion so literals remain exact


def _is_scalar(x) -> bool:
    return isinstance(x, Fraction)


def _as_rf(x) -> RationalFunction:
    if isinstance(x, Fraction):
        return RationalFunction.coerce(Polynomial([x]))
    return x


def _as_op(x) -> DifferentialOperator:
    if isinstance(x, DifferentialOperator):
        return x
    return DifferentialOperator([_as_rf(x)]) if not _is_zero(x) else None


def _is_zero(x) -> bool:
    if isinstance(x, Fraction):
        return x == 0
    if isinstance(x, RationalFunction):
        return x.is_zero()
    return False


def _neg(x):
    return -x


def _add(a, b):
    if _is_scalar(a) and _is_scalar(b):
        return a + b
    if not isinstance(a, DifferentialOperator) and not isinstance(b, DifferentialOperator):
        return _as_rf(a) + _as_rf(b)
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return _as_op(a) + _as_op(b)


def _mul(a, b):
    if _is_scalar(a) and _is_scalar(b):
        return a * b
    if not isinstance(a, DifferentialOperator) and not isinstance(b, DifferentialOperator):
        return _as_rf(a) * _as_rf(b)
    if _is_zero(a) or _is_zero(b):
        return Fraction(0)
    return compose(_as_op(a), _as_op(b))


def _div(a, b, text: str):
    if isinstance(b, DifferentialOperator):
        raise ParseError(f"cannot divide by an expression containing D in {text!r}")
    if _is_zero(b):
        raise ParseError(f"division by zero in {text!r}")
    if _is_scalar(b):
        return _mul(a, 1 / b)
    return _mul(a, _as_rf(b).inverse())


def _pow(base, k: int, text: str):
    if isinstance(base, DifferentialOperator):
        if k < 0:
            raise ParseError(f"negative power of an expression containing D in {text!r}")
        out = DifferentialOperator([1])
        for _ in range(k):
            out = compose(out, base)
        return out
    if _is_scalar(base):
        if base == 0 and k < 0:
            raise ParseError(f"division by zero in {text!r}")
        return base**k
    return _as_rf(base) ** k


def parse_operator(text: str, variable: str = "t") -> DifferentialOperator:
    """Parse an operator expression such as ``"t*(1-t)*D^2 + (1-2*t)*D - 1/4"``."""
    try:
        value = _Parser(text, variable).parse()
    except AllCoefficientsZero:
        raise ParseError(f"expression {text!r} is the zero operator") from None
    if _is_zero(value):
        raise ParseError(f"expression {text!r} is the zero operator")
    if isinstance(value, DifferentialOperator):
        return value
    return DifferentialOperator([_as_rf(value)])


def parse_function(text: str, variable: str = "t") -> RationalFunction:
    """Parse a rational function of ``t``; ``D`` is not allowed."""
    try:
        value = _Parser(text, variable).parse()
    except AllCoefficientsZero:
        return RationalFunction()
    if isinstance(value, DifferentialOperator):
        if value.order > 0:
            raise ParseError(f"expected a function of {variable}, got an operator: {text!r}")
        return value.coeffs[0]
    return _as_rf(value)


def parse_number(text: str) -> complex:
    """Parse a constant expression such as ``"1/2 + i"``."""
    f = parse_function(text)
    if not f.is_constant():
        raise ParseError(f"expected a constant, got {text!r}")
    return complex(f.num(0)) if not f.is_zero() else 0j
