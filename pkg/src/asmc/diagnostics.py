"""Sampler accuracy against oracle values: errors, coverage, cost scaling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import check_step_size
from .potential import as_points
from .rng import stream
from .schedule import BudgetExceededError, PlanConstants, plan_parameters
from .smc import SamplerOptions, run_asmc

# one-sided 95% normal quantile for the binomial slack
Z95 = 1.6448536269514722
# stream level reserved for baseline chains
BASELINE_LEVEL = 1 << 21


class RunFailedError(RuntimeError):
    def __init__(self, seed, cause):
        super().__init__(f"run with seed {seed} failed: {cause}")
        self.seed = seed
        self.cause = cause


@dataclass(frozen=True)
class TestFunction:
    name: str
    h: object = field(repr=False)
    osc: float
    reference: float | None = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not self.osc >= 0:
            raise ValueError("oscillation must be non-negative")

    def __call__(self, x):
        return self.h(x)

    def with_reference(self, value):
        return TestFunction(self.name, self.h, self.osc, float(value))

    def check_oscillation(self, probes):
        v = np.asarray(self.h(probes), float)
        return float(v.max() - v.min()) <= self.osc + 1e-12


def basin_indicator(potential, i=1):
    def h(x):
        X, _ = as_points(x, potential.dim)
        return (potential.basin_index(X) == i).astype(float)

    return TestFunction(f"basin_{i}", h, 1.0)


def tanh_first():
    return TestFunction("tanh_x1", lambda x: np.tanh(np.atleast_2d(x)[:, 0]), 2.0)


def indicator_K(landscape):
    return TestFunction("in_K", lambda x: landscape.in_K(np.atleast_2d(x)).astype(float), 1.0)


def mc_error(samples, h, reference):
    """|mean of h over the samples - reference|."""
    samples = np.atleast_2d(samples)
    if len(samples) == 0:
        raise ValueError("no samples")
    return float(abs(np.mean(h(samples)) - reference))


@dataclass
class CoverageReport:
    seeds: list
    errors: list
    delta: float
    theta: float
    osc: float = 1.0
    name: str = ""

    @property
    def runs(self):
        return len(self.errors)

    @property
    def successes(self):
        return [e < self.osc * self.delta for e in self.errors]

    @property
    def success_fraction(self):
        return float(np.mean(self.successes)) if self.errors else 0.0

    @property
    def target(self):
        return 1.0 - self.theta

    @property
    def slack(self):
        return Z95 * math.sqrt(self.theta * (1 - self.theta) / max(self.runs, 1))

    @property
    def passed(self):
        return self.success_fraction >= self.target - self.slack

    def to_rows(self):
        return [
            {"seed": s, "error": e, "success": int(ok)} for s, e, ok in zip(self.seeds, self.errors, self.successes)
        ]

    def to_dict(self):
        return {
            "name": self.name,
            "runs": self.runs,
            "delta": self.delta,
            "theta": self.theta,
            "osc": self.osc,
            "success_fraction": self.success_fraction,
            "target": self.target,
            "slack": self.slack,
            "passed": self.passed,
            "median_error": float(np.median(self.errors)) if self.errors else None,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["seed", "error", "success"])
            w.writeheader()
            for row in sorted(self.to_rows(), key=lambda r: r["seed"]):
                w.writerow(row)


def coverage_trial(
    potential, schedule, plan, h, delta, theta, seeds, options=SamplerOptions(), init="uniform", min_runs=20
):
    """Run the sampler once per seed and count runs with error < osc * delta.

    ``h`` must carry its oracle reference value.  Errors are stored in
    sorted seed order, so permuting ``seeds`` yields the same report.
    """
    seeds = sorted(int(s) for s in seeds)
    if len(seeds) < min_runs:
        raise ValueError(f"coverage needs at least {min_runs} runs")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if h.reference is None:
        raise ValueError("test function has no reference value")
    errors = []
    for s in seeds:
        try:
            X, _ = run_asmc(potential, schedule, plan, init, s, options)
        except Exception as exc:  # propagate with the run id
            raise RunFailedError(s, exc) from exc
        errors.append(mc_error(X, h, h.reference))
    return CoverageReport(seeds, errors, delta, theta, h.osc, h.name)


# ---------------------------------------------------------------------------
# cost scaling


def _slope(x, y):
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def complexity_sweep(
    potential_or_landscape,
    etas,
    delta,
    theta,
    constants=PlanConstants(),
    *,
    alpha=None,
    nu=1.0,
    budget_cap=None,
    spectral=True,
):
    """Planned cost M*N*T and the mixing proxy 1/lambda_2 over temperatures.

    ``potential_or_landscape`` is a landscape summary (for the barrier
    ratio; its alpha is used unless ``alpha`` is given).  Returns a dict
    with one row per eta and the two fitted slopes: log(M N T) against
    log(1/eta), and log(1/lambda_2) against 1/eta.  Temperatures whose
    plan exceeds ``budget_cap`` are skipped with a note.
    """
    from .oracle.spectral import spectral_solve

    landscape = potential_or_landscape
    alpha = landscape.alpha if alpha is None else alpha
    etas = [float(e) for e in etas]
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise ValueError("etas must be decreasing")
    rows, notes = [], []
    for eta in etas:
        try:
            plan = plan_parameters(
                eta, delta, theta, alpha, nu, landscape.barrier_ratio, constants, C_K=landscape.C_K, budget_cap=budget_cap
            )
        except BudgetExceededError as exc:
            notes.append(f"eta={eta:g} skipped: {exc}")
            continue
        row = {"eta": eta, "M": plan.M, "N": plan.N, "T": plan.T, "budget": plan.budget}
        if spectral:
            lam2 = spectral_solve(landscape.potential, eta).lambda2
            row.update(lambda2=lam2, mixing_time=1.0 / lam2)
        rows.append(row)
    out = {"rows": rows, "notes": notes, "barrier": landscape.energy_barrier}
    if len(rows) >= 2:
        inv = [1.0 / r["eta"] for r in rows]
        out["budget_slope"] = _slope(np.log(inv), [math.log(r["budget"]) for r in rows])
        out["N_slope"] = _slope(np.log(inv), [math.log(r["N"]) for r in rows])
        if spectral:
            out["mixing_slope"] = _slope(inv, [math.log(r["mixing_time"]) for r in rows])
    return out


def delta_scaling(landscape, eta, deltas, theta, constants=PlanConstants(), alpha=1.0, nu=1.0):
    """Slopes of log N and log(M N T) against log(1/delta) at fixed eta."""
    Ns, budgets = [], []
    for d in deltas:
        p = plan_parameters(eta, d, theta, alpha, nu, landscape.barrier_ratio, constants, budget_cap=None)
        Ns.append(p.N)
        budgets.append(p.budget)
    x = np.log(1.0 / np.asarray(deltas, float))
    return {"N_slope": _slope(x, np.log(Ns)), "budget_slope": _slope(x, np.log(budgets))}


# ---------------------------------------------------------------------------
# direct Langevin baseline


def baseline_chains(potential, eta, n_steps, seeds, h, reference, start=None, dt=1e-2, thin=10, chunk=100_000):
    """One long Euler-Maruyama chain per seed, all advanced together.

    Each chain starts at ``start`` (default: the global minimum), runs
    ``n_steps`` steps of size ``dt`` at temperature ``eta`` on its own
    stream, and averages ``h`` over every ``thin``-th state.  Returns the
    per-seed errors ``|average - reference|``.
    """
    seeds = [int(s) for s in seeds]
    n_steps = int(n_steps)
    x0 = potential.minima[0] if start is None else np.asarray(start, float).reshape(potential.dim)
    X = np.repeat(x0[None, :], len(seeds), axis=0)
    if n_steps == 0:
        return [mc_error(x0[None, :], h, reference) for _ in seeds]
    check_step_size(potential, dt)
    gens = [stream(s, BASELINE_LEVEL, 0) for s in seeds]
    scale = math.sqrt(2.0 * eta * dt)
    total = np.zeros(len(seeds))
    count = 0
    done = 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        xi = np.stack([g.standard_normal((m, potential.dim)) for g in gens], axis=1)
        xi *= scale
        grad = potential._raw_gradient  # skip shape checks in the hot loop
        for s in range(m):
            X -= dt * grad(X)
            X += xi[s]
            if (done + s + 1) % thin == 0:
                total += h(X)
                count += 1
        if not np.all(np.isfinite(X)):
            raise FloatingPointError("baseline chain diverged; reduce dt")
        done += m
    if count == 0:
        total, count = h(X), 1
    return [float(abs(v - reference)) for v in total / count]


def baseline_direct_langevin(potential, eta, budget, seed, h, reference, start=None, dt=1e-2, thin=10):
    """Error of a single direct chain using ``budget`` Langevin steps."""
    return baseline_chains(potential, eta, budget, [seed], h, reference, start, dt, thin)[0]


def separation_benchmark(asmc_errors, baseline_errors):
    """Median errors of both methods and their ratio."""
    a, b = float(np.median(asmc_errors)), float(np.median(baseline_errors))
    return {"asmc_median": a, "baseline_median": b, "ratio": a / b if b > 0 else math.inf}
