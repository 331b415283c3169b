import numpy as np
import pytest

from hbsmimo.channel import ArrayGeometry
from hbsmimo.numerics import dft_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def nominal_geometry():
    return ArrayGeometry(256)


@pytest.fixture(scope="session")
def nominal_dft():
    return dft_matrix(256)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
