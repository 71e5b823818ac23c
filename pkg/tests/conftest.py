import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pab_sfe import Demand, Firm, Scenario

settings.register_profile("default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

PAPER_COSTS = (0.25, 0.5, 1.0, 2.0)


def paper_scenario(K: float) -> Scenario:
    return Scenario(Demand(100.0, 10.0), tuple(Firm(i + 1, c) for i, c in enumerate(PAPER_COSTS)), K)


@pytest.fixture(scope="session")
def paper_demand():
    return Demand(100.0, 10.0)


@pytest.fixture(params=[5.0, 10.0, 1000.0], ids=["K5", "K10", "K1000"])
def paper(request):
    return paper_scenario(request.param)


@pytest.fixture(scope="session")
def example1():
    """Two firms, D(p) = 100 - p, K = 1, C_1(q) = q^2 / 2."""
    return Scenario(Demand(100.0, 1.0), (Firm(1, 0.5), Firm(2, 0.5)), 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
