import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from entroscope.dynamics import ModelParams, evolve_many, generate_ensemble
from entroscope.field import Grid
from entroscope.functionals import sobolev_norm

settings.register_profile(
    "batch",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("batch")


@pytest.fixture(scope="session")
def small_grid():
    return Grid(-40.0, 40.0, 512)


@pytest.fixture(scope="session")
def fine_grid():
    return Grid(-40.0, 40.0, 4096)


@pytest.fixture(scope="session")
def fd_params():
    return ModelParams(eta=0.1, scheme="finite_difference")


@pytest.fixture(scope="session")
def ensemble32(fd_params, fine_grid):
    """Default analysis ensemble: 32 members, burn-in 200, n=4096."""
    return generate_ensemble(32, fd_params, burn_in=200.0, seed=7, grid=fine_grid)


@pytest.fixture(scope="session")
def ensemble16_small(fd_params, small_grid):
    """Cheap ensemble for API-level tests."""
    return generate_ensemble(16, fd_params, burn_in=60.0, seed=5, grid=small_grid)


@pytest.fixture(scope="session")
def absorption_run(fd_params, fine_grid):
    """16-member run: burn-in to t=200, then t in [200, 400] with the
    alpha-weighted loc2 norm sampled every 2.5 time units."""
    started = time.perf_counter()
    ens = generate_ensemble(16, fd_params, burn_in=200.0, seed=11, grid=fine_grid)
    obs = lambda s: sobolev_norm("loc2", s, fd_params.alpha, fd_params.eta,
                                 scheme="finite_difference")
    res = evolve_many(ens.members, fd_params, 200.0, sample_every=2.5,
                      observable=obs)
    elapsed = time.perf_counter() - started
    times = res.times + 200.0
    return times, np.asarray(res.observables), ens, elapsed
