import pytest
from hypothesis import settings

from evopid import build_environment

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def environment():
    return build_environment()


@pytest.fixture(scope="session")
def plant(environment):
    return environment[0]


@pytest.fixture(scope="session")
def sim(environment):
    return environment[1]


@pytest.fixture(scope="session")
def train_route(environment):
    return environment[2]["train"]


@pytest.fixture(scope="session")
def test_route(environment):
    return environment[2]["test"]
