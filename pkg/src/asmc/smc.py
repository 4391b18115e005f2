"""The annealed SMC driver: Langevin moves, tempering weights, resampling.

For k = 1 .. M-1 every particle runs Langevin dynamics at eta_k for time
T, is weighted by exp(-(1/eta_{k+1} - 1/eta_k) U) and the population is
resampled multinomially; a final Langevin phase at eta_M produces the
output.  Unnormalised weights suffice because the normalising constants
cancel in the resampling probabilities.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp

from .dynamics import LangevinParams, simulate_ensemble
from .potential import as_points
from .rng import INIT_LEVEL, RESAMPLE_SLOT, stream
from .schedule import BudgetExceededError

RESAMPLERS = ("multinomial", "systematic")


class WeightCollapseError(RuntimeError):
    """Every resampling weight is zero (log weight -inf)."""


class InitialPointError(ValueError):
    pass


@dataclass
class ParticleEnsemble:
    level: int
    positions: np.ndarray
    log_weights: np.ndarray
    stream_ids: np.ndarray
    in_K: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        n = len(self.positions)
        self.log_weights = np.asarray(self.log_weights, dtype=float).reshape(n)
        self.stream_ids = np.asarray(self.stream_ids).reshape(n)
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("particle positions must be finite")

    @property
    def size(self):
        return len(self.positions)


@dataclass(frozen=True)
class LevelRecord:
    level: int
    eta: float
    ess: float
    basin_fractions: tuple
    frac_in_K: float
    resample_max_count: int
    count_histogram: tuple
    wall_ms: float


@dataclass
class RunTrace:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_rows(self):
        rows = []
        for r in self.records:
            row = {"level": r.level, "eta": r.eta, "ess": r.ess}
            for j, f in enumerate(r.basin_fractions, start=1):
                row[f"frac_basin_{j}"] = f
            row.update(frac_in_K=r.frac_in_K, resample_max_count=r.resample_max_count, wall_ms=r.wall_ms)
            rows.append(row)
        return rows


@dataclass(frozen=True)
class SamplerOptions:
    dt: float = 1e-2
    integrator: str = "ula"
    guard_radius: float = 1e6
    resampler: str = "multinomial"
    workers: int = 1
    budget_cap: float | None = 1e10
    c_ini: float | None = None

    def __post_init__(self):
        if self.resampler not in RESAMPLERS:
            raise ValueError(f"resampler must be one of {RESAMPLERS}")

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# weights and resampling


def log_weight(potential, eta_k, eta_next, x):
    """log of pi~_{eta_next}(x) / pi~_{eta_k}(x) = -(1/eta_next - 1/eta_k) U(x)."""
    if eta_next > eta_k:
        raise ValueError("annealing must not raise the temperature")
    return -(1.0 / eta_next - 1.0 / eta_k) * potential.energy(x)


def normalized_weights(log_weights):
    """Resampling probabilities from log weights, via max subtraction."""
    lw = np.asarray(log_weights, dtype=float)
    if lw.size == 0 or not np.any(np.isfinite(lw)):
        raise WeightCollapseError("all resampling weights vanish")
    if np.any(np.isnan(lw)) or np.any(lw == np.inf):
        raise ValueError("log weights must be finite or -inf")
    w = np.exp(lw - lw.max())
    return w / w.sum()


def effective_sample_size(log_weights):
    """(sum w)^2 / sum w^2, between 1 and the number of particles."""
    lw = np.asarray(log_weights, dtype=float)
    if not np.any(np.isfinite(lw)):
        raise WeightCollapseError("all resampling weights vanish")
    return float(np.exp(2 * logsumexp(lw) - logsumexp(2 * lw)))


def _systematic_indices(p, n, rng):
    u = (rng.random() + np.arange(n)) / n
    idx = np.searchsorted(np.cumsum(p), u, side="right")
    return np.minimum(idx, len(p) - 1)


def resample(ensemble, rng, scheme="multinomial"):
    """Draw N particles from the ensemble in proportion to their weights.

    Multinomial resampling picks each new particle independently with
    probability proportional to exp(log weight).  Returns the resampled
    ensemble (log weights reset to 0) and the offspring count of every
    original particle.
    """
    p = normalized_weights(ensemble.log_weights)
    n = ensemble.size
    if scheme == "multinomial":
        idx = rng.choice(n, size=n, p=p)
    elif scheme == "systematic":
        idx = _systematic_indices(p, n, rng)
    else:
        raise ValueError(f"unknown resampling scheme {scheme!r}")
    counts = np.bincount(idx, minlength=n)
    new = ParticleEnsemble(
        level=ensemble.level + 1,
        positions=ensemble.positions[idx],
        log_weights=np.zeros(n),
        stream_ids=ensemble.stream_ids,
    )
    return new, counts


def resample_multinomial(ensemble, rng):
    return resample(ensemble, rng, "multinomial")


# ---------------------------------------------------------------------------
# initial points


def initial_points(kind, n, dim, seed):
    """``n`` starting points: ``"uniform"`` on [-1, 1]^d or ``"origin"``."""
    if kind == "uniform":
        return stream(seed, INIT_LEVEL, 0).uniform(-1.0, 1.0, size=(n, dim))
    if kind == "origin":
        return np.zeros((n, dim))
    raise InitialPointError(f"unknown initial distribution {kind!r}; use 'uniform' or 'origin'")


# ---------------------------------------------------------------------------
# driver


def _level_record(potential, landscape, X, k, eta, ess, counts, t0):
    labels = potential.basin_index(X)
    fracs = tuple(float(np.mean(labels == j)) for j in range(1, potential.n_minima + 1))
    in_K = float(np.mean(landscape.in_K(X))) if landscape is not None else math.nan
    if counts is None:
        max_count, hist = 1, (0, len(X))
    else:
        max_count, hist = int(counts.max()), tuple(int(c) for c in np.bincount(counts))
    return LevelRecord(
        level=k, eta=float(eta), ess=float(ess), basin_fractions=fracs, frac_in_K=in_K,
        resample_max_count=max_count, count_histogram=hist, wall_ms=1e3 * (time.perf_counter() - t0),
    )


def run_asmc(potential, schedule, plan, init_points, seed, options=SamplerOptions(), landscape=None, on_level=None):
    """Run the annealed SMC sampler and return ``(samples, trace)``.

    ``plan`` supplies N (particles) and T (Langevin time per level); it may
    be a :class:`~asmc.schedule.Plan` or anything with ``N`` and ``T``
    attributes.  ``init_points`` is an ``(N, d)`` array or one of the
    initial distribution names accepted by :func:`initial_points`.
    ``on_level`` is called with each :class:`LevelRecord` as soon as the
    level finishes, so traces can be streamed to disk.
    """
    N, T = int(plan.N), float(plan.T)
    if N < 1 or T < 0:
        raise ValueError("need N >= 1 and T >= 0")
    M = schedule.M
    if getattr(plan, "M", M) != M:
        raise ValueError(f"schedule has {M} levels but the plan asks for {plan.M}")
    if isinstance(init_points, str):
        X = initial_points(init_points, N, potential.dim, seed)
    else:
        X, _ = as_points(init_points, potential.dim)
        X = X.copy()
    if len(X) != N:
        raise InitialPointError(f"{len(X)} initial points for N = {N}")
    c_ini = options.c_ini if options.c_ini is not None else potential.initial_energy_bound
    start_max = float(np.max(potential.energy(X)))
    if start_max > c_ini + 1e-9 * max(1.0, abs(c_ini)):
        raise InitialPointError(f"max U over initial points {start_max:.4g} exceeds C_ini = {c_ini:.4g}")
    dt = min(options.dt, T) if T > 0 else options.dt  # a level shorter than dt is one step
    steps = N * M * (LangevinParams(schedule.levels[0], T, dt).n_steps if T > 0 else 0)
    if options.budget_cap is not None and steps > options.budget_cap:
        raise BudgetExceededError(f"run needs {steps:.3g} Langevin steps (cap {options.budget_cap:.3g})")

    ensemble = ParticleEnsemble(level=1, positions=X, log_weights=np.zeros(N), stream_ids=np.arange(N))
    trace = RunTrace()
    for k in range(1, M + 1):
        t0 = time.perf_counter()
        eta_k = float(schedule.levels[k - 1])
        params = LangevinParams(eta_k, T, dt, options.integrator, options.guard_radius)
        moved = simulate_ensemble(
            ensemble.positions, potential, params, seed, k, ensemble.stream_ids, workers=options.workers
        )
        if k == M:
            record = _level_record(potential, landscape, moved, k, eta_k, N, None, t0)
            ensemble = ParticleEnsemble(k, moved, np.zeros(N), ensemble.stream_ids)
        else:
            lw = log_weight(potential, eta_k, float(schedule.levels[k]), moved)
            weighted = ParticleEnsemble(k, moved, lw, ensemble.stream_ids)
            ess = effective_sample_size(lw)
            ensemble, counts = resample(weighted, stream(seed, k, RESAMPLE_SLOT), options.resampler)
            record = _level_record(potential, landscape, moved, k, eta_k, ess, counts, t0)
        trace.records.append(record)
        if on_level is not None:
            on_level(record)
    return ensemble.positions, trace


def total_steps(schedule, plan, dt):
    """Langevin steps a run performs, summed over particles and levels."""
    n = LangevinParams(schedule.levels[0], plan.T, min(dt, plan.T)).n_steps if plan.T > 0 else 0
    return int(plan.N) * schedule.M * n


# ---------------------------------------------------------------------------
# CSV output


def write_samples_csv(path, samples, config_hash=None):
    samples = np.atleast_2d(samples)
    with open(path, "w", newline="") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(samples.shape[1])])
        for row in samples:
            w.writerow([repr(float(v)) for v in row])


def read_samples_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return np.loadtxt(lines[1:], delimiter=",", ndmin=2)


class TraceWriter:
    """Appends one CSV row per finished level."""

    def __init__(self, path, n_basins, config_hash=None):
        self.path = path
        self.columns = (
            ["level", "eta", "ess"]
            + [f"frac_basin_{j}" for j in range(1, n_basins + 1)]
            + ["frac_in_K", "resample_max_count", "wall_ms"]
        )
        with open(path, "w", newline="") as fh:
            if config_hash:
                fh.write(f"# config_hash={config_hash}\n")
            csv.writer(fh).writerow(self.columns)

    def __call__(self, record):
        row = RunTrace([record]).to_rows()[0]
        with open(self.path, "a", newline="") as fh:
            csv.writer(fh).writerow([row[c] for c in self.columns])
