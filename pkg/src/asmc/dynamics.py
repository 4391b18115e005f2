"""Time-discretised overdamped Langevin dynamics dY = -grad U dt + sqrt(2 eps) dW."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .potential import as_points
from .rng import StreamId, particle_normals

INTEGRATORS = ("ula", "mala")
# particles per noise block; fixed so results never depend on the worker count
BLOCK = 256


class DivergenceError(RuntimeError):
    """A trajectory left the guard ball or became non-finite."""


@dataclass(frozen=True)
class LangevinParams:
    temperature: float
    total_time: float
    dt: float = 1e-2
    integrator: str = "ula"
    guard_radius: float = 1e6

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.total_time < 0:
            raise ValueError("total_time must be non-negative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.total_time > 0 and self.dt > self.total_time:
            raise ValueError(f"dt={self.dt} exceeds total_time={self.total_time}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")

    @property
    def n_steps(self):
        if self.total_time == 0:
            return 0
        return max(1, math.ceil(self.total_time / self.dt - 1e-9))

    def step_sizes(self):
        """``n_steps`` step lengths; the last one takes the remaining time."""
        n = self.n_steps
        h = np.full(n, self.dt)
        if n:
            h[-1] = self.total_time - (n - 1) * self.dt
        return h


def stability_threshold(potential):
    """Largest explicit step that is stable near every declared minimum."""
    kappa = max(float(np.linalg.eigvalsh(potential.hessian(m))[-1]) for m in potential.minima)
    return 2.0 / kappa


def check_step_size(potential, dt):
    limit = stability_threshold(potential)
    if dt >= limit:
        raise ValueError(f"dt={dt} is not below the stability threshold {limit:.4g} of {potential!r}")


def langevin_step(x, potential, eps, dt, xi):
    """One Euler-Maruyama step ``x - grad U(x) dt + sqrt(2 eps dt) xi``."""
    X, single = as_points(x, potential.dim)
    xi = np.asarray(xi, dtype=float).reshape(X.shape)
    out = X - potential.gradient(X) * dt + math.sqrt(2.0 * eps * dt) * xi
    if not np.all(np.isfinite(out)):
        raise DivergenceError("non-finite state after Langevin step; dt too large?")
    return out[0] if single else out


def _run_block(X, potential, params, h, noise, uniforms):
    eps = params.temperature
    mala = params.integrator == "mala"
    if mala:
        U = potential.energy(X)
    for s, hs in enumerate(h):
        g = potential.gradient(X)
        scale = math.sqrt(2.0 * eps * hs)
        Y = X - hs * g + scale * noise[:, s, :]
        if mala:
            UY = potential.energy(Y)
            back = X - Y + hs * potential.gradient(Y)
            log_q_back = -np.sum(back * back, axis=1) / (4.0 * eps * hs)
            log_q_fwd = -0.5 * np.sum(noise[:, s, :] ** 2, axis=1)
            log_alpha = -(UY - U) / eps + log_q_back - log_q_fwd
            accept = np.log(uniforms[:, s]) < log_alpha
            X = np.where(accept[:, None], Y, X)
            U = np.where(accept, UY, U)
        else:
            X = Y
        peak = np.max(np.abs(X)) if X.size else 0.0
        if not peak <= params.guard_radius:  # also catches nan
            raise DivergenceError(
                f"trajectory left the guard ball |x| <= {params.guard_radius:g} at step {s}; reduce dt"
            )
    return X


def simulate_ensemble(X0, potential, params, seed, level, particles=None, workers=1):
    """Run every row of ``X0`` for time ``params.total_time``.

    Row ``j`` draws its noise from stream ``(seed, level, particles[j])``
    (``particles`` defaults to ``0..n-1``), so the output is a pure
    function of those inputs and does not depend on ``workers``.
    """
    X0, single = as_points(X0, potential.dim)
    n = len(X0)
    particles = np.arange(n) if particles is None else np.asarray(particles)
    if len(particles) != n:
        raise ValueError("one stream id per particle is required")
    h = params.step_sizes()
    if len(h) == 0:
        out = X0.copy()
        return out[0] if single else out
    check_step_size(potential, params.dt)
    mala = params.integrator == "mala"

    def work(start):
        sl = slice(start, min(start + BLOCK, n))
        draws = particle_normals(seed, level, particles[sl], len(h), potential.dim, uniforms=mala)
        noise, u = draws if mala else (draws, None)
        return _run_block(X0[sl].copy(), potential, params, h, noise, u)

    starts = range(0, n, BLOCK)
    if workers > 1 and n > BLOCK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    out = np.concatenate(parts) if parts else X0.copy()
    return out[0] if single else out


def simulate(x0, potential, params, stream_id):
    """Simulate a single particle on its dedicated stream."""
    if not isinstance(stream_id, StreamId):
        stream_id = StreamId(*stream_id)
    x0 = np.asarray(x0, dtype=float).reshape(potential.dim)
    return simulate_ensemble(
        x0[None, :], potential, params, stream_id.seed, stream_id.level, [stream_id.particle]
    )[0]
