import numpy as np
import pytest

from isoboltz.constants import ModelParams
from isoboltz.grid import Grid, gaussian, gaussian_profile
from isoboltz.sim import SimConfig, run
from isoboltz.spectral import SpectralPlan

DEFAULT = dict(d=3, gamma=-2.1, s=0.85, n=32, L=8.0)


@pytest.fixture(scope="session")
def default_params():
    return ModelParams(d=DEFAULT["d"], gamma=DEFAULT["gamma"], s=DEFAULT["s"])


@pytest.fixture(scope="session")
def default_grid():
    return Grid(d=DEFAULT["d"], n=DEFAULT["n"], L=DEFAULT["L"])


@pytest.fixture(scope="session")
def default_plan(default_grid, default_params):
    return SpectralPlan(default_grid, default_params)


@pytest.fixture(scope="session")
def default_field(default_grid):
    return gaussian(default_grid, 1.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def default_profile():
    return gaussian_profile(1.0, 0.0, 1.0, DEFAULT["d"])


@pytest.fixture(scope="session")
def default_run():
    """The reference simulation shared by the sim and acceptance suites."""
    cfg = SimConfig(params=ModelParams(d=3, gamma=-2.1, s=0.85))
    return cfg, run(cfg)


def random_positive_field(grid, rng, n_bumps=2):
    """A smooth strictly positive field: mixture of Gaussians."""
    vals = np.zeros(grid.shape)
    for _ in range(n_bumps):
        vals += gaussian(
            grid,
            rng.uniform(0.3, 1.5),
            rng.uniform(-grid.L / 4, grid.L / 4, size=grid.d),
            rng.uniform(0.5, 2.0),
        ).values
    from isoboltz.grid import Field

    return Field(grid, vals)
