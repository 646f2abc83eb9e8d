"""Shared fixtures: benchmark parameter sets, grids, and random draws."""

import numpy as np
import pytest

from fracmim import GridSpec, ModelParams

# Benchmark parameter set with alpha=0.8, gamma=0.25 (the standard
# high-dispersion configuration all cross-checks run on).
BENCH_PARAMS = ModelParams(
    P=5.0, R1=2.0, R2=2.0, beta=0.5, omega=1.5, lam=0.05, mu=0.1,
    alpha=0.8, gamma=0.25,
)


@pytest.fixture
def bench_params() -> ModelParams:
    return BENCH_PARAMS


@pytest.fixture
def default_grid() -> GridSpec:
    return GridSpec(m=40, n=200, T=100.0)


@pytest.fixture
def tiny_grid() -> GridSpec:
    return GridSpec(m=8, n=20, T=10.0)


def admissible_draw(rng: np.random.Generator) -> ModelParams:
    """One random parameter set satisfying every admissibility bound."""
    return ModelParams(
        P=rng.uniform(0.2, 10.0),
        R1=rng.uniform(1.0, 5.0),
        R2=rng.uniform(1.0, 5.0),
        beta=rng.uniform(0.05, 0.95),
        omega=rng.uniform(0.05, 3.0),
        lam=rng.uniform(1e-4, 1.0),
        mu=rng.uniform(1e-4, 1.0),
        alpha=rng.uniform(0.05, 0.95),
        gamma=rng.uniform(0.05, 0.95),
    )
