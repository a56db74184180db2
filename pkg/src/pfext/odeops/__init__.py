"""Polynomials, rational functions and linear differential operators."""

from .operator import DifferentialOperator, compose, dlog, normalize, pullback_to_infinity
from .parser import parse_function, parse_number, parse_operator
from .polynomial import Polynomial, cluster_roots
from .rational import RationalFunction
from .singular import (
    INFINITY,
    FuchsianReport,
    SingularPoint,
    SingularityProfile,
    fuchsian_check,
    indicial_exponents,
    indicial_polynomial,
    is_infinity,
    singularities,
)

__all__ = [
    "DifferentialOperator",
    "FuchsianReport",
    "INFINITY",
    "Polynomial",
    "RationalFunction",
    "SingularPoint",
    "SingularityProfile",
    "cluster_roots",
    "compose",
    "dlog",
    "fuchsian_check",
    "indicial_exponents",
    "indicial_polynomial",
    "is_infinity",
    "normalize",
    "parse_function",
    "parse_number",
    "parse_operator",
    "pullback_to_infinity",
    "singularities",
]
