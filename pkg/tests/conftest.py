"""Shared fixtures: small benchmark samples, the non-uniqueness
fixture model, and a hypothesis profile sized for CI."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slcd import (
    Dataset,
    Hyperparams,
    ScmSpec,
    SolverControls,
    Uniform,
    VariableDef,
    builtin_spec,
    sample,
)

settings.register_profile(
    "ci", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def truth_matrices() -> dict[int, np.ndarray]:
    """Ground-truth structural matrices of the five built-in models."""
    return {i: builtin_spec(i).structural_matrix().entries for i in range(1, 6)}


@pytest.fixture(scope="session")
def ds2_data() -> Dataset:
    return sample(builtin_spec(2), 1000, 0)


@pytest.fixture(scope="session")
def ds3_data() -> Dataset:
    return sample(builtin_spec(3), 1000, 0)


@pytest.fixture(scope="session")
def pair_sum_spec() -> ScmSpec:
    """Two independent variables and their sum: the smallest model where
    X = DX alone cannot identify the structure (the identity matrix and
    an aliased matrix both reconstruct the data exactly)."""
    return ScmSpec(name="pair_sum", variables=(
        VariableDef.independent(Uniform(-2.5, 2.5)),
        VariableDef.independent(Uniform(-2.5, 2.5)),
        VariableDef.dependent([(0, 1.0), (1, 1.0)]),
    ))


@pytest.fixture(scope="session")
def pair_sum_data(pair_sum_spec) -> Dataset:
    return sample(pair_sum_spec, 1000, 0)


# An alternative matrix with zero reconstruction residual on pair_sum
# data: row 1 rewrites x1 as x3 - x2.
PAIR_SUM_ALIAS = np.array([
    [0.0, -1.0, 1.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
])


@pytest.fixture()
def fast_hp() -> Hyperparams:
    """Reduced restart budget for solver tests that do not gate recovery."""
    return Hyperparams(restarts=4)


@pytest.fixture()
def fast_controls() -> SolverControls:
    return SolverControls(seed=0)
