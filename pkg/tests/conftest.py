"""Shared fixtures.

The expensive numerical artifacts (continued branch, refined fold) are
session-scoped so the suite pays for each once.
"""
import pytest

from skinflow import (
    IntegratorConfig,
    ModelParams,
    branch_amplitudes,
    continue_branch,
    find_cycle,
    locate_fold,
)


@pytest.fixture(scope="session")
def benchmark_params():
    """Parameters used for every quantitative benchmark: a=1/2, b=1/32, E=8."""
    return ModelParams(gamma=-0.5, a=0.5, b=1.0 / 32.0, E=8.0)


@pytest.fixture(scope="session")
def integrator():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def default_branch(benchmark_params, integrator):
    """Branch continued from gamma = 0.5 through the fold, fold refined."""
    p_start = benchmark_params.with_gamma(0.5)
    seed = branch_amplitudes(p_start).a_out
    cycle = find_cycle(p_start, p_start.omega() * seed, integrator)
    branch = continue_branch(
        benchmark_params, 0.5, cycle, step=0.35, gamma_stop=-1.5, cfg=integrator,
    )
    locate_fold(branch, refine_tol=1e-6, cfg=integrator)
    return branch


@pytest.fixture(scope="session")
def numeric_fold(default_branch):
    """(gamma_c, s_c) from the session branch."""
    assert default_branch.fold is not None
    return default_branch.fold
