import pytest

from serverpack import Config
from serverpack.scenario import fixture_path, load_scenario


@pytest.fixture
def table1():
    return load_scenario(fixture_path("table1"))


@pytest.fixture
def table1_state(table1):
    return table1[0]


@pytest.fixture
def table2_state():
    state, _ = load_scenario(fixture_path("table2"))
    return state


@pytest.fixture
def config():
    return Config()
