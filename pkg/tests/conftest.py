import numpy as np
import pytest

from dickefloquet.hilbert import build_basis
from dickefloquet.model import DriveParams, ModelParams


@pytest.fixture
def small_basis():
    return build_basis(4, 20)


@pytest.fixture
def tiny_basis():
    return build_basis(2, 12)


@pytest.fixture
def params():
    return ModelParams(omega=1.0, omega0=1.0, g1=0.7, g2=0.2)


@pytest.fixture
def drive():
    return DriveParams(amplitude=1.0, period=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, dim, count=None):
    shape = (dim,) if count is None else (dim, count)
    psi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return psi / np.linalg.norm(psi, axis=0)
