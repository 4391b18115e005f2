"""Monte Carlo estimates of the diagonal transition density p_t(x, x)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..dynamics import LangevinParams, simulate_ensemble
from .grid import grid_partition_function

# stream levels for transition runs; far above any annealing level
TRANSITION_LEVEL = 1 << 20


class BandwidthError(ValueError):
    """The kernel bandwidth came out zero or undefined."""


@dataclass(frozen=True)
class TransitionEstimate:
    eps: float
    t: float
    x: tuple
    estimate: float
    pi_x: float
    ratio: float
    bound: float
    bandwidth: float
    bandwidth_rule: str
    n_runs: int

    def to_dict(self):
        return asdict(self)


def nash_bound(potential, eps, t, x, C_p=1.0):
    """C_p exp(U(x)/eps) (1 - exp(-c t / d))^{-d/2} with c the declared Laplacian bound."""
    d = potential.dim
    c = potential.laplacian_bound
    return C_p * math.exp(potential.energy(np.atleast_1d(x)) / eps) * (-math.expm1(-c * t / d)) ** (-d / 2)


def silverman_bandwidth(samples):
    """Silverman's rule of thumb, using the smallest per-axis spread."""
    n, d = samples.shape
    if n < 2:
        raise BandwidthError("need at least two samples for a bandwidth")
    sigma = float(np.min(np.std(samples, axis=0, ddof=1)))
    if not sigma > 0:
        raise BandwidthError("samples have zero spread")
    return (4.0 / (d + 2)) ** (1.0 / (d + 4)) * sigma * n ** (-1.0 / (d + 4))


def kde_at(samples, x, bandwidth):
    """Gaussian kernel density estimate at a single point."""
    d = samples.shape[1]
    z = (samples - np.asarray(x, float)) / bandwidth
    k = np.exp(-0.5 * np.sum(z * z, axis=1))
    return float(k.mean() / (2 * math.pi) ** (d / 2) / bandwidth**d)


def _local_bandwidth(potential, samples, x):
    # restricting to x's basin keeps a bimodal cloud from inflating the spread
    if potential.n_minima > 1:
        local = samples[potential.basin_index(samples) == potential.basin_index(np.atleast_1d(x))]
        return silverman_bandwidth(local), "silverman-basin"
    return silverman_bandwidth(samples), "silverman"


def transition_density_sweep(
    potential, eps, times, x, n_runs=10_000, seed=0, dt=1e-3, integrator="ula", bandwidth=None, Z=None
):
    """Estimates of p_t(x, x) at increasing ``times`` from one set of trajectories.

    ``n_runs`` paths start at ``x`` and are advanced from one time to the
    next, so the estimates share their randomness.  ``dt`` and
    ``integrator`` may be sequences with one entry per time, e.g. MALA
    with a coarse step for a long final segment.  ``bandwidth`` fixes
    the kernel width; by default Silverman's rule is applied to the
    endpoints lying in the basin of ``x``.
    """
    if potential.dim > 2:
        raise ValueError("transition density estimates are limited to d <= 2")
    times = [float(t) for t in times]
    if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be positive and increasing")
    x = np.atleast_1d(np.asarray(x, float))
    if Z is None:
        Z = grid_partition_function(potential, eps)
    pi_x = math.exp(-potential.energy(x) / eps) / Z
    dts = np.broadcast_to(np.asarray(dt, float), (len(times),))
    integrators = [integrator] * len(times) if isinstance(integrator, str) else list(integrator)
    if len(integrators) != len(times):
        raise ValueError("one integrator per time is required")
    Y = np.repeat(x[None, :], n_runs, axis=0)
    out, now = [], 0.0
    for j, t in enumerate(times):
        params = LangevinParams(eps, t - now, min(float(dts[j]), t - now), integrators[j])
        Y = simulate_ensemble(Y, potential, params, seed, TRANSITION_LEVEL + j)
        now = t
        if bandwidth is None:
            h, rule = _local_bandwidth(potential, Y, x)
        else:
            h, rule = float(bandwidth), "fixed"
        if not h > 0:
            raise BandwidthError("bandwidth must be positive")
        est = kde_at(Y, x, h)
        out.append(
            TransitionEstimate(
                eps=float(eps), t=t, x=tuple(x.tolist()), estimate=est, pi_x=pi_x, ratio=est / pi_x,
                bound=nash_bound(potential, eps, t, x), bandwidth=h, bandwidth_rule=rule, n_runs=n_runs,
            )
        )
    return out


def transition_density_diagonal(potential, eps, t, x, n_runs=10_000, bandwidth=None, seed=0, dt=1e-3, integrator="ula"):
    """Single-time version of :func:`transition_density_sweep`."""
    if n_runs < 10_000:
        raise ValueError("n_runs must be at least 10^4")
    return transition_density_sweep(potential, eps, [t], x, n_runs, seed, dt, integrator, bandwidth)[0]


def fitted_C_p(estimates, potential):
    """Smallest C_p for which every ratio p/pi lies below the bound curve."""
    return max(e.ratio / nash_bound(potential, e.eps, e.t, e.x) for e in estimates)


def ou_diagonal_density(eps, t, x, omega=1.0):
    """Exact p_t(x, x) for U = omega x^2 / 2 in one dimension."""
    mean = x * math.exp(-omega * t)
    var = eps / omega * (-math.expm1(-2 * omega * t))
    return math.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
