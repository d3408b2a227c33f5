import numpy as np
import pytest

from freefall.biomech import Anthropometrics, build_body
from freefall.config import load_config


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def body(config):
    return build_body(config.anthropometrics())


@pytest.fixture(scope="session")
def default_body():
    return build_body(Anthropometrics(total_mass=80.0, stature=1.80))


@pytest.fixture(scope="session")
def pattern_set(config):
    return config.pattern_set()


@pytest.fixture(scope="session")
def aero(config):
    return config.aero_coefficients()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
