import functools
import math

import numpy as np
import pytest

from thetawave import builtin_system, gauss_newton
from thetawave.residual import GivenParams, ResidualSystem
from thetawave.seed import SeedConfig, initial_guess
from thetawave.tables import published

TWO_PI = 2 * math.pi


def table1_row1_given():
    return GivenParams([TWO_PI / 10], [0.46 * TWO_PI], 0.0)


@functools.lru_cache(maxsize=None)
def warm_solve(table, row):
    """Solve a published row from its printed values (cached across tests)."""
    r = published(table, row)
    rs = ResidualSystem(builtin_system("coupled-ramani", r.v0), r.given())
    return rs, gauss_newton(rs, r.solution())


@functools.lru_cache(maxsize=None)
def dispersion_solve_t1r1():
    given = table1_row1_given()
    rs = ResidualSystem(builtin_system("coupled-ramani", 0.0), given)
    x0 = initial_guess(rs.system, given, SeedConfig(1.0, 1.0))
    return rs, x0, gauss_newton(rs, x0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def config_dir():
    from pathlib import Path
    return Path(__file__).resolve().parent.parent / "configs"


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
