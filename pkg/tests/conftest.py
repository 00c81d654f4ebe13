import numpy as np
import pytest

from artifact.grassmann import GrassmannNumber
from artifact.verification import Draws

NGEN = 6


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def draws(rng):
    return Draws(rng, NGEN)


@pytest.fixture
def g():
    """Generators of a 6-generator pool."""
    return [GrassmannNumber.gen(i, NGEN) for i in range(NGEN)]


def const(x, n=NGEN):
    return GrassmannNumber.const(x, n)
