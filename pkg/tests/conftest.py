import numpy as np
import pytest

from donorspec.species import get_species


@pytest.fixture
def indium():
    return get_species("In")


@pytest.fixture
def gallium():
    return get_species("Ga")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
