import pytest

from gridshock.network import load_demand, load_network
from gridshock.cli import bundled_path


@pytest.fixture(scope="session")
def bundled_net():
    return load_network(bundled_path("network16.json"))


@pytest.fixture(scope="session")
def bundled_demand(bundled_net):
    return load_demand(bundled_path("demand16.csv"), bundled_net)
