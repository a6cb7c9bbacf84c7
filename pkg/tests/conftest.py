import numpy as np
import pytest

from gwsnake.tree_codec import PlaneTree

WORKED_DEGREES = [4, 0, 0, 2, 1, 4, 0, 0, 0, 0, 0, 2, 3, 0, 0, 0, 0]


@pytest.fixture
def worked_tree():
    return PlaneTree(WORKED_DEGREES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
