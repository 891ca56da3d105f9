import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_skew(rng, p, scale=1.0):
    m = rng.normal(scale=scale, size=(p, p))
    return m - m.T
