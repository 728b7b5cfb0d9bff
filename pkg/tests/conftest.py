import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from weylsonine import StructurePair, make_scale, make_weight, uniform_grid

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def gaussian(t):
    return np.exp(-np.asarray(t, dtype=float) ** 2 / 2)


@pytest.fixture
def ref_grid():
    return uniform_grid(-20.0, 20.0, 0.01)


@pytest.fixture
def identity():
    return StructurePair.identity()


@pytest.fixture
def weighted():
    return StructurePair(make_scale(), make_weight("exponential", rate=0.25))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
