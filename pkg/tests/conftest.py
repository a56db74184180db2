import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pfext.acceptance import CorpusData
from pfext.odeops import parse_operator

settings.register_profile(
    "pfext",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("pfext")

LEGENDRE = "t*(1-t)*D^2 + (1-2*t)*D - 1/4"
AIRY = "D^2 - t"


@pytest.fixture(scope="session")
def corpus() -> CorpusData:
    return CorpusData()


@pytest.fixture(scope="session")
def legendre():
    return parse_operator(LEGENDRE)


@pytest.fixture(scope="session")
def legendre_rep(corpus):
    return corpus.pipeline("legendre").representation


def assert_close(a, b, tol):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    err = float(np.max(np.abs(a - b))) if a.size else 0.0
    assert err < tol, f"difference {err:.3e} exceeds {tol:.1e}"
