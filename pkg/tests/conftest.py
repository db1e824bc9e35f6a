import numpy as np
import pytest

from periodyn.certify import find_decay_rate, find_weights
from periodyn.model import builtin_example


@pytest.fixture(scope="session")
def builtin():
    return builtin_example()


@pytest.fixture(scope="session")
def builtin_cert(builtin):
    cert = find_weights(builtin, grid_points=4096)
    assert cert is not None
    return cert


@pytest.fixture(scope="session")
def builtin_alpha(builtin, builtin_cert):
    return find_decay_rate(builtin, builtin_cert.xi, grid_points=4096)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
