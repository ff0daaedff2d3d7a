import os
import sys

import pytest

# Add project root to sys.path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from shared.cross_model import CrossNetwork
from shared.settings import reload_settings
from services.bench_chakra.generators import generate_random_cross


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long reproduction jobs")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long reproduction job, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_settings():
    # settings are cached per process; start every test from the real environment
    reload_settings()
    yield


@pytest.fixture
def worked_example():
    """
    s(-2,0); n1(-3,0) on I, n2(-1,0) on II, n3(1,0) on III, n4(0,2.01) on IV,
    n5(0,-1) on V. Node ids follow that order (s = 0).
    """
    return CrossNetwork.from_points(
        (-2.0, 0.0),
        [(-3.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (0.0, 2.01), (0.0, -1.0)],
    )


@pytest.fixture
def four_arms():
    """Source at the intersection, one node on every half-line at distance 1."""
    return CrossNetwork.from_points((0.0, 0.0), [(-1.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])


@pytest.fixture
def random_cross():
    def make(n_nodes, seed, source_mode="uniform"):
        return generate_random_cross(n_nodes, seed, source_mode=source_mode)
    return make
