import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dqdcompile import library

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def lib():
    """Full standard library at seed 0, compiled once per session."""
    return library.build_library(seed=0)


@pytest.fixture(scope="session")
def lib_path(lib, tmp_path_factory):
    path = tmp_path_factory.mktemp("lib") / "lib.json"
    library.save(lib, path)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def taylor_expm(A, order=30):
    """exp(A) by scaling and squaring a truncated Taylor series."""
    norm = np.linalg.norm(A, 1)
    k = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    B = A / 2**k
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for m in range(1, order + 1):
        term = term @ B / m
        out = out + term
    for _ in range(k):
        out = out @ out
    return out
