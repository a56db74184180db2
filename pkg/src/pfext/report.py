"""JSON-compatible encoding of numbers, vectors and matrices.

Complex numbers are ``[re, im]`` pairs and matrices are row-major lists of
rows, so reports can be diffed as text.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def cnum(z) -> list[float]:
    z = complex(z)
    return [_real(z.real), _real(z.imag)]


def _real(x: float) -> float:
    x = float(x)
    return 0.0 if x == 0 else x


def cvector(v) -> list[list[float]]:
    return [cnum(z) for z in np.asarray(v).reshape(-1)]


def cmatrix(m) -> list[list[list[float]]]:
    return [[cnum(z) for z in row] for row in np.atleast_2d(np.asarray(m))]


def from_cnum(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    return complex(pair[0], pair[1])


def from_cvector(data) -> np.ndarray:
    return np.array([from_cnum(p) for p in data], dtype=complex)


def from_cmatrix(data) -> np.ndarray:
    return np.array([[from_cnum(p) for p in row] for row in data], dtype=complex)


def location(loc) -> Any:
    return loc if isinstance(loc, str) else cnum(loc)


def finite(x: float) -> float | None:
    """Floats that JSON can carry; infinities become None."""
    return float(x) if math.isfinite(x) else None


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"
