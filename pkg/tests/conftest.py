import math

import pytest

from mirrorphase.units import ReducedSetup

TRUNCATION_SETS = [
    (1e-5, 10.0, 1.5),
    (1e-6, 10.0, 1.5),
    (1e-7, 10.0, 1.5),
    (1e-8, 500.0, 1.5),
    (1e-8, 1000.0, 1.5),
]


@pytest.fixture
def single_headline():
    return ReducedSetup(alpha=1e-7, scenario="single", zeta=91000.0, theta=math.pi / 4)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
