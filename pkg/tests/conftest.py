import pytest

from dfdopt.materials import default_battery_catalogue, default_materials, packaged_data
from dfdopt.scenario import load_scenario


@pytest.fixture(scope="session")
def db():
    return default_materials()


@pytest.fixture(scope="session")
def catalogue():
    return default_battery_catalogue()


@pytest.fixture(scope="session")
def tank_scenario_path():
    return packaged_data("scenarios/tank_assembly.cfg")


@pytest.fixture(scope="session")
def leo_scenario_path():
    return packaged_data("scenarios/leo_spacecraft.cfg")


@pytest.fixture(scope="session")
def tank_scenario(tank_scenario_path):
    # session-scoped so the intact-phase and fragment caches warm up once
    return load_scenario(tank_scenario_path)


@pytest.fixture(scope="session")
def leo_scenario(leo_scenario_path):
    return load_scenario(leo_scenario_path)
