import numpy as np
import pytest

from diracnorm import DiracSpace, Grid


@pytest.fixture(scope="session")
def space12():
    return DiracSpace(Grid(12, 12.0), 1.0)


@pytest.fixture(scope="session")
def space16():
    return DiracSpace(Grid(16, 16.0), 1.0)


@pytest.fixture(scope="session")
def desk_space():
    """The reference resolution used by the acceptance suite."""
    return DiracSpace(Grid(24, 16.0), 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)
