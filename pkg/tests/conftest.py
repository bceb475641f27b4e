import numpy as np
import pytest

from hausdorff_h1 import homspace as hs

ALL_GROUPS = [
    hs.GroupSpec("euclidean", 1),
    hs.GroupSpec("euclidean", 2),
    hs.GroupSpec("torus", 1),
    hs.GroupSpec("torus", 2),
    hs.GroupSpec("su2"),
    hs.GroupSpec("heisenberg", 1),
    hs.GroupSpec("heisenberg", 2),
    hs.GroupSpec("upper_triangular", 3),
    hs.GroupSpec("upper_triangular", 4),
]

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
