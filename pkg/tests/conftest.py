import numpy as np
import pytest

from ufrb.data import Dataset, generate_swiss_roll
from ufrb.graph import geodesic_distances


@pytest.fixture(scope="session")
def swiss500():
    return generate_swiss_roll(500, seed=0)


@pytest.fixture(scope="session")
def swiss500_gd(swiss500):
    return geodesic_distances(swiss500, 5)


def small_problem(seed, n=30, d_h=3):
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(n, d_h))
    ds = Dataset(x)
    return ds, geodesic_distances(ds, 5)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    def _record(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"{criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
