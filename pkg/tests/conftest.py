import numpy as np
import pytest

from chfbundle.lut import LutModel
from chfbundle.props import default_table

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def props():
    return default_table()


@pytest.fixture(scope="session")
def lut_model():
    return LutModel()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
