from __future__ import annotations

import functools
import math

import numpy as np
import pytest

from rwlab.ambient import WarpingFunction
from rwlab.classa import Grid
from rwlab.config import build_family, fixture_record

# one representative per warping kind, with t-ranges where each is smooth and nonvanishing
WARPINGS = {
    "constant": (WarpingFunction.constant(1.5), (-1.0, 1.0)),
    "exponential": (WarpingFunction.exponential(0.7), (-1.0, 1.0)),
    "cosh": (WarpingFunction.cosh(1.2, 0.5), (-1.0, 1.0)),
    "power": (WarpingFunction.power(2.0, 1.5), (-1.0, 1.0)),
    "linear": (WarpingFunction.linear(0.5, 2.0, interval=(-3.0, 3.0)), (-1.0, 1.0)),
}


@functools.lru_cache(maxsize=None)
def built(name: str):
    """Fixture patches are immutable once built; cache them across tests."""
    return build_family(fixture_record(name))


def grid_for(name: str, n: int = 8) -> Grid:
    return Grid.over(built(name).patch.domain, n)


def random_points(rng, n, t_range, curvature):
    t = rng.uniform(*t_range, size=n)
    if curvature == -1:
        d = rng.normal(size=(n, 3))
        d /= np.linalg.norm(d, axis=1)[:, None]
        q = d * 0.9 * rng.uniform(size=(n, 1)) ** (1 / 3)
    else:
        q = rng.uniform(-2.0, 2.0, size=(n, 3))
    return np.concatenate([t[:, None], q], axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


SQRT2 = math.sqrt(2.0)


# acceptance lines collected during the run and echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
