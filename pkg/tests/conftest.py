import numpy as np
import pytest

from nematic.grid import Grid2
from nematic.initial_data import InitialDataSpec, make_initial_director


@pytest.fixture
def grid64():
    return Grid2(64, 20.0)


@pytest.fixture
def grid128():
    return Grid2(128, 20.0)


def smooth_director(grid, seed=3, amplitude=0.7, band=3):
    return make_initial_director(InitialDataSpec(kind="random_smooth", amplitude=amplitude, band_limit=band), grid, seed=seed)


def wide_bubble(grid, lam=4.0):
    return make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=lam), grid)


def orders(errs):
    e = np.asarray(errs)
    return np.log2(e[:-1] / e[1:])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
