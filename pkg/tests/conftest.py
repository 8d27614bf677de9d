import numpy as np
import pytest

from conslab.data import gen_gaussian_mixture


@pytest.fixture(scope="session")
def ds_small():
    """Compact mixture shared by the fast unit tests."""
    return gen_gaussian_mixture(60, 8, 3, 2.0, 42)


@pytest.fixture(scope="session")
def ds_default():
    """The registry default mixture (used by a few mid-weight tests)."""
    return gen_gaussian_mixture(200, 20, 5, 2.0, 42)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
