import numpy as np
import pytest

import cavibus as cb


@pytest.fixture
def sp():
    """Reference parameter set (E_J = 40 ueV, g = 1e-2, k = 1, n = 0)."""
    return cb.default_params()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
