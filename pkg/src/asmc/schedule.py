"""Annealing schedules and the (M, N, T) planner.

Inverse temperatures are linearly spaced between ``1/eta1`` and
``1/eta``.  The planner evaluates the level count, sample size and level
time required by the convergence guarantee; its constants ``c_n``, ``c_t``
and ``c_tem`` are not known in closed form and are treated as inputs that
:func:`calibrate_constants` can tune empirically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np


class PlanError(ValueError):
    pass


class BudgetExceededError(PlanError):
    """The requested plan needs more Langevin steps than the budget cap."""


@dataclass(frozen=True)
class AnnealSchedule:
    eta: float
    eta1: float
    levels: np.ndarray = field(repr=False)
    nu: float = 1.0
    degenerate: bool = False

    @property
    def M(self):
        return len(self.levels)

    @property
    def inverse_temperatures(self):
        return 1.0 / self.levels

    def __iter__(self):
        return iter(self.levels)

    def to_dict(self):
        return {"eta": self.eta, "eta1": self.eta1, "nu": self.nu, "M": self.M, "levels": self.levels.tolist()}


def build_schedule(eta, M, eta1=1.0, nu=1.0):
    """Levels eta_1 > ... > eta_M = eta with equally spaced 1/eta_k.

    With ``eta1 = 1`` this is eta_k = (M-1) eta / ((M-1) eta + (k-1)(1-eta)).
    ``M = 1`` with ``eta != eta1`` cannot interpolate; a single level at
    ``eta`` is returned with ``degenerate=True`` and a warning.
    """
    M = int(M)
    if not eta > 0:
        raise ValueError("eta must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    if eta > eta1:
        raise ValueError(f"target eta={eta} must not exceed eta1={eta1}")
    if M == 1:
        degenerate = eta != eta1
        if degenerate:
            warnings.warn("M = 1 with eta != eta1: single level at eta, no annealing", stacklevel=2)
        return AnnealSchedule(eta, eta1, np.array([float(eta)]), nu, degenerate)
    k = np.arange(M)
    inv = 1.0 / eta1 + k * (1.0 / eta - 1.0 / eta1) / (M - 1)
    levels = 1.0 / inv
    levels[0], levels[-1] = eta1, eta
    return AnnealSchedule(float(eta), float(eta1), levels, float(nu))


def critical_level(schedule, eta_cr):
    """Smallest 1-based k >= 2 with eta_k <= eta_cr, or M + 1 if none."""
    for k in range(2, schedule.M + 1):
        if schedule.levels[k - 1] <= eta_cr:
            return k
    return schedule.M + 1


@dataclass(frozen=True)
class PlanConstants:
    c_n: float = 1.0
    c_t: float = 1.0
    c_tem: float = 1.0

    def __post_init__(self):
        if min(self.c_n, self.c_t, self.c_tem) <= 0:
            raise ValueError("planner constants must be positive")


@dataclass(frozen=True)
class Plan:
    eta: float
    M: int
    N: int
    T: float
    delta: float
    theta: float
    alpha: float
    nu: float
    barrier_ratio: float
    constants: PlanConstants
    eta_cr: float
    k_cr: int
    eta1: float = 1.0
    dt: float = 1e-2
    C_r: float | None = None
    overridden: tuple = ()

    @property
    def steps_per_level(self):
        return max(1, math.ceil(self.T / self.dt - 1e-9)) if self.T > 0 else 0

    @property
    def total_steps(self):
        """Langevin steps summed over particles and levels."""
        return self.N * self.M * self.steps_per_level

    @property
    def budget(self):
        """Continuous-time cost M * N * T."""
        return self.M * self.N * self.T

    def requirements(self):
        """Right-hand sides of the three planner inequalities."""
        return _requirements(
            self.eta, self.delta, self.theta, self.alpha, self.nu, self.barrier_ratio, self.constants, self.M, self.N
        )

    def satisfies_requirements(self):
        req = self.requirements()
        return {"M": self.M >= req["M"], "N": self.N >= req["N"], "T": self.T >= req["T"]}

    def schedule(self):
        return build_schedule(self.eta, self.M, self.eta1, self.nu)

    def to_dict(self):
        d = asdict(self)
        d["overridden"] = list(self.overridden)
        d["total_steps"] = self.total_steps
        d["levels"] = self.schedule().levels.tolist()
        return d


def _log_T(eta, delta, theta, alpha, barrier_ratio, c_t, M, N):
    """log of c_t((MN/theta)^{ratio(1+alpha)}(log N + log(M/theta)) + log(1/delta) + 1/eta)."""
    big = barrier_ratio * (1 + alpha) * math.log(M * N / theta) + math.log(math.log(N) + math.log(M / theta))
    small = math.log(1.0 / delta) + 1.0 / eta
    return math.log(c_t) + big + math.log1p(small * math.exp(-big))


def _requirements(eta, delta, theta, alpha, nu, barrier_ratio, constants, M, N):
    return {
        "M": math.ceil(1.0 / (nu * eta) - 1e-12),
        "N": constants.c_n * M**2 / delta**2 * math.log(M / theta),
        "T": math.exp(_log_T(eta, delta, theta, alpha, barrier_ratio, constants.c_t, M, N)),
    }


def plan_parameters(
    eta,
    delta,
    theta,
    alpha,
    nu,
    barrier_ratio,
    constants=PlanConstants(),
    *,
    C_K=None,
    eta1=1.0,
    dt=1e-2,
    budget_cap=1e10,
):
    """Smallest (M, N, T) meeting the planner inequalities, plus eta_cr and k_cr.

    ``C_K`` (the truncation-set constant of the landscape) is needed for
    the critical temperature; without it ``eta_cr`` is NaN and ``k_cr`` is
    the sentinel M + 1.  ``budget_cap`` bounds ``N * M * ceil(T / dt)``;
    ``None`` disables the check.
    """
    if not (0 < delta < 1 and 0 < theta < 1):
        raise ValueError("delta and theta must lie in (0, 1)")
    if alpha <= 0 or nu <= 0:
        raise ValueError("alpha and nu must be positive")
    if barrier_ratio < 1:
        raise ValueError("barrier ratio is at least 1 by definition")
    if not 0 < eta <= eta1:
        raise ValueError("need 0 < eta <= eta1")
    M = math.ceil(1.0 / (nu * eta) - 1e-12)
    N_real = constants.c_n * M**2 / delta**2 * math.log(M / theta)
    if not math.isfinite(N_real) or N_real > 2**62:
        raise BudgetExceededError(f"N = {N_real:.3g} overflows")
    N = max(1, math.ceil(N_real - 1e-9))
    log_T = _log_T(eta, delta, theta, alpha, barrier_ratio, constants.c_t, M, N)
    if budget_cap is not None and log_T + math.log(N * M) - math.log(dt) > math.log(budget_cap):
        raise BudgetExceededError(
            f"plan needs about {math.exp(min(log_T + math.log(N * M / dt), 700)):.3g} Langevin steps "
            f"(cap {budget_cap:.3g})"
        )
    T = math.exp(log_T)
    eta_cr, k_cr = _critical(C_K, constants.c_tem, M, N, theta, eta, eta1, nu)
    plan = Plan(
        eta=eta, M=M, N=N, T=T, delta=delta, theta=theta, alpha=alpha, nu=nu,
        barrier_ratio=barrier_ratio, constants=constants, eta_cr=eta_cr, k_cr=k_cr,
        eta1=eta1, dt=dt,
    )
    if budget_cap is not None and plan.total_steps > budget_cap:
        raise BudgetExceededError(f"plan needs {plan.total_steps:.3g} Langevin steps (cap {budget_cap:.3g})")
    return plan


def _critical(C_K, c_tem, M, N, theta, eta, eta1, nu):
    if C_K is None:
        return math.nan, M + 1
    denom = math.log(c_tem * M * N / theta)
    eta_cr = C_K / denom if denom > 0 else math.inf
    return eta_cr, critical_level(build_schedule(eta, M, eta1, nu), eta_cr)


def apply_overrides(plan, M=None, N=None, T=None, unsafe=False, C_K=None):
    """Replace M, N or T by explicit values.

    Raises :class:`PlanError` when the result violates a planner inequality,
    unless ``unsafe`` acknowledges it.
    """
    changes = {k: v for k, v in (("M", M), ("N", N), ("T", T)) if v is not None}
    if not changes:
        return plan
    new = replace(plan, **changes, overridden=tuple(sorted(changes)))
    if "M" in changes or "N" in changes:
        eta_cr, k_cr = _critical(C_K, plan.constants.c_tem, new.M, new.N, new.theta, new.eta, new.eta1, new.nu)
        new = replace(new, eta_cr=eta_cr, k_cr=k_cr)
    ok = new.satisfies_requirements()
    bad = [k for k, v in ok.items() if not v]
    if bad and not unsafe:
        raise PlanError(f"override violates the planner inequality for {', '.join(bad)}; pass unsafe to force")
    return new


def calibrate_constants(passes, start=PlanConstants(), *, factor=2.0, max_iter=12, lower=1e-30):
    """Shrink ``c_n`` then ``c_t`` to the cheapest values that still pass.

    ``passes(constants) -> bool`` runs the empirical coverage check.  Each
    constant is searched by bisection in log space between a passing and a
    failing value, assuming larger constants never hurt; the search stops
    once the bracket is narrower than ``factor``.  ``c_tem`` only moves the
    critical level, which the sampler never uses, so it is left as given.
    Returns the constants and a log of every evaluation.
    """
    history = []

    def check(c):
        ok = bool(passes(c))
        history.append((c, ok))
        return ok

    current = start
    for name in ("c_n", "c_t"):
        hi = getattr(current, name)
        if not check(current):
            # grow until passing
            for _ in range(max_iter):
                hi *= 16.0
                if check(replace(current, **{name: hi})):
                    break
            else:
                raise PlanError(f"calibration of {name} found no passing value")
        lo = hi
        for _ in range(max_iter):
            lo /= 16.0
            if lo < lower or not check(replace(current, **{name: lo})):
                break
            hi = lo
        else:
            lo = hi  # still passing at the floor of the search
        while hi / lo > factor:
            mid = math.sqrt(hi * lo)
            if check(replace(current, **{name: mid})):
                hi = mid
            else:
                lo = mid
        current = replace(current, **{name: hi})
    return current, history
