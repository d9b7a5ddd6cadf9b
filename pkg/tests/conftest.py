import numpy as np
import pytest
from hypothesis import settings

from srjsample import PointSet

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_points(xy, start=0) -> PointSet:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    return PointSet.from_xy(xy, ids=np.arange(start, start + len(xy)))


@pytest.fixture
def e1():
    """One r at (2, 2) with half-extent 2 and three points of S; |J| = 2."""
    R = make_points([(2, 2)])
    S = make_points([(1, 1), (3, 4), (9, 9)], start=10)
    return R, S, 2.0, 2.0


@pytest.fixture
def uniform_small():
    rng = np.random.default_rng(7)
    R = make_points(rng.uniform(0, 100, size=(120, 2)))
    S = make_points(rng.uniform(0, 100, size=(300, 2)), start=1000)
    return R, S, 6.0, 4.0


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
