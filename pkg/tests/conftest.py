import pytest

from primeflow.cf import DiophantineParams, construct_alpha_in_D
from primeflow.roof import default_roof


@pytest.fixture(scope="session")
def params():
    return DiophantineParams(c0=1.0, delta=0.5, d=0.3)


@pytest.fixture(scope="session")
def cf(params):
    built, _ = construct_alpha_in_D(params, "00000", 5)
    return built


@pytest.fixture(scope="session")
def roof():
    return default_roof().normalized()
