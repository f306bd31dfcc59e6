import functools

import numpy as np
import pytest

from cousinlab import delaunay as D

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def unduloid(n, chart="conformal"):
    return D.generate_unduloid(n, chart=chart)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
