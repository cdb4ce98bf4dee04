import numpy as np
import pytest

from cdflow.operator import discretize, make_operator


@pytest.fixture(scope="session")
def cauchy3():
    """phi = 1 + x**2, beta = 3, grid chosen so that x = 1 is a node."""
    return make_operator("quadratic", 3.0, R=80.0, n=8001)


@pytest.fixture(scope="session")
def cauchy3_default():
    return make_operator("quadratic", 3.0)


@pytest.fixture(scope="session")
def cauchy3_dop(cauchy3_default):
    return discretize(cauchy3_default)


@pytest.fixture(scope="session")
def quartic2():
    return make_operator("quartic", 2.0, R=20.0, n=8001)


def node(op, x0):
    i = int(np.argmin(np.abs(op.x - x0)))
    assert abs(op.x[i] - x0) < 1e-9
    return i


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
