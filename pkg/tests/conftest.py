import numpy as np
import pytest

from anosov.scenarios import build_scenario
from anosov.words import Ball, ConjugacyClasses


@pytest.fixture(scope="session")
def so21():
    return build_scenario("schottky-so21")


@pytest.fixture(scope="session")
def so21_ball(so21):
    return Ball(so21.gs, max_len=8)


@pytest.fixture(scope="session")
def so21_classes(so21):
    return ConjugacyClasses(so21.gs, max_len=8)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_unimodular(rng, n, spread=1.0):
    """Random SL(n) matrix with entries O(1) and controlled anisotropy."""
    m = rng.normal(size=(n, n))
    while abs(np.linalg.det(m)) < 1e-3:
        m = rng.normal(size=(n, n))
    m = m * np.exp(spread * rng.normal(size=n))[:, None]
    d = np.linalg.det(m)
    if d < 0:
        m[0] = -m[0]
        d = -d
    return m / d ** (1.0 / n)
