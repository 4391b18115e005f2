import math

import numpy as np
import pytest

from asmc.oracle import spectral_solve, transition_density_diagonal, transition_density_sweep
from asmc.oracle.transition import (
    BandwidthError,
    fitted_C_p,
    kde_at,
    nash_bound,
    ou_diagonal_density,
    silverman_bandwidth,
)
from asmc.potential import make_potential


def test_ou_exact_density_limits():
    # as t grows the diagonal density tends to the stationary Gaussian
    assert ou_diagonal_density(0.5, 50.0, 0.3) == pytest.approx(
        math.exp(-0.09 / 1.0) / math.sqrt(2 * math.pi * 0.5), rel=1e-12
    )


def test_kde_of_gaussian_sample():
    n = 50_000
    X = np.random.default_rng(0).normal(size=(n, 1))
    h = silverman_bandwidth(X)
    smoothed = 1 / math.sqrt(2 * math.pi * (1 + h * h))  # N(0, 1) convolved with the kernel
    sd = math.sqrt(smoothed / (2 * math.sqrt(math.pi)) / (n * h))
    assert abs(kde_at(X, [0.0], h) - smoothed) < 4 * sd


def test_degenerate_bandwidth():
    with pytest.raises(BandwidthError):
        silverman_bandwidth(np.zeros((10, 1)))
    with pytest.raises(BandwidthError):
        silverman_bandwidth(np.zeros((1, 1)))


def test_minimum_run_count():
    with pytest.raises(ValueError):
        transition_density_diagonal(make_potential("quadratic"), 0.5, 0.5, [0.0], n_runs=100)


def test_nash_bound_decreases_in_t():
    U = make_potential("quartic")
    b = [nash_bound(U, 0.2, t, [-1.0]) for t in (0.1, 0.5, 2.0)]
    assert b[0] > b[1] >= b[2] >= 1


@pytest.mark.slow
@pytest.mark.parametrize("t", [0.2, 1.0])
def test_ou_kde_within_five_percent(t):
    U = make_potential("quadratic")
    est = transition_density_diagonal(U, 0.5, t, [0.5], n_runs=20_000, seed=1)
    assert est.estimate == pytest.approx(ou_diagonal_density(0.5, t, 0.5), rel=0.05)
    assert est.bandwidth_rule == "silverman" and est.n_runs == 20_000


@pytest.mark.slow
def test_quartic_ratio_decreases_to_one():
    U = make_potential("quartic")
    lam2 = spectral_solve(U, 0.2).lambda2
    times = [0.05, 0.25, 0.5 / lam2, 10 / lam2]
    est = transition_density_sweep(
        U, 0.2, times, [-1.0], n_runs=10_000, seed=0,
        dt=[0.002, 0.002, 0.05, 0.05], integrator=["ula", "ula", "mala", "mala"],
    )
    ratios = [e.ratio for e in est]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1) < 0.1
    C_p = fitted_C_p(est, U)
    assert all(e.ratio <= C_p * e.bound * (1 + 1e-12) for e in est)
    assert all(e.estimate >= 0 for e in est)
