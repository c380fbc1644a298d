import math

import numpy as np
import pytest

from lckverify.lck import Geometry
from lckverify.models import build_model, sample_points

E2PI = math.exp(2.0 * math.pi)


@pytest.fixture(scope="session")
def hopf2():
    return build_model({"model": "hopf", "n": 2})


@pytest.fixture(scope="session")
def deformed2():
    return build_model({"model": "hopf-deformed", "n": 2})


@pytest.fixture(scope="session")
def flat2():
    return build_model({"model": "flat", "n": 2})


@pytest.fixture(scope="session")
def hopf_geo(hopf2):
    return Geometry(hopf2, sample_points(2, E2PI, 24, seed=3))


@pytest.fixture(scope="session")
def deformed_geo(deformed2):
    return Geometry(deformed2, sample_points(2, E2PI, 24, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
