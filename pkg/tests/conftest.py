import numpy as np
import pytest

from adscmc.core import Isometry, SL2Matrix


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_sl2(rng, scale=0.8) -> SL2Matrix:
    """Random SL(2, R) element from a Lie-algebra exponential."""
    a, b, c = rng.normal(0, scale, 3)
    x = np.array([[a, b], [c, -a]])
    m = np.eye(2)
    term = np.eye(2)
    for k in range(1, 24):
        term = term @ x / k
        m = m + term
    m = m / np.sqrt(np.linalg.det(m))
    return SL2Matrix.from_matrix(m)


def random_isometry(rng, scale=0.8) -> Isometry:
    return Isometry.from_pair(random_sl2(rng, scale), random_sl2(rng, scale))


@pytest.fixture
def random_isometries(rng):
    return [random_isometry(rng) for _ in range(12)]
