import sys

import pytest

from entangle_verify.core_model import NATURAL, make_grid
from entangle_verify.oscillator import ground_state


@pytest.fixture(scope="session")
def params():
    return NATURAL


@pytest.fixture(scope="session")
def grid3():
    # the default verification grid: extent 8, h 0.05, 321 nodes per axis
    return make_grid(8.0, 0.05, 3)


@pytest.fixture(scope="session")
def grid3_fine():
    # order-4 truncation on excited states is ~5e-6 at h 0.05; 1e-6 checks need h 0.025
    return make_grid(8.0, 0.025, 3)


@pytest.fixture(scope="session")
def ground(params):
    return ground_state(params)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
