import numpy as np
import pytest

from mhdslab.grid import make_grid


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16, 16, 16, 2 * np.pi, 2 * np.pi, 2 * np.pi)


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8, 8, 8, 2 * np.pi, 2 * np.pi, 2 * np.pi)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
