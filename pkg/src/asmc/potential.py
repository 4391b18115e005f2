"""Energy landscapes U: R^d -> R and the landscape quantities derived from them.

Every potential is shifted so that its deepest declared minimum has energy
exactly 0, and minima are labelled 1, 2, ... in order of increasing energy
(declaration order breaks ties).  Basin labels follow the same numbering.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize


class PotentialError(ValueError):
    pass


class DimensionError(PotentialError):
    pass


class UnknownPotentialError(PotentialError):
    pass


class BasinError(RuntimeError):
    """Raised when the descent flow does not settle at a declared minimum."""


class LandscapeError(RuntimeError):
    pass


def as_points(x, dim):
    """Coerce ``x`` to an ``(n, dim)`` float array.

    Returns the array and a flag telling whether a single point was given.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise DimensionError(f"point has length {arr.shape[0]}, potential has dimension {dim}")
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionError(f"expected shape (n, {dim}), got {arr.shape}")
    return arr, False


@dataclass(frozen=True)
class FlowParams:
    """Settings for integrating the descent flow dy/dt = -grad U(y)."""

    dt: float = 1e-2
    grad_tol: float = 1e-6
    snap_radius: float = 1e-3
    max_step: float = 0.1
    max_steps: int = 200_000


class Potential:
    """Base class for energy landscapes.

    Subclasses implement ``_raw_energy`` and ``_raw_gradient`` on ``(n, d)``
    arrays; the public methods handle shape checks and the normalisation
    shift.  ``minima_guess`` only needs to be in the right basin, minima are
    refined by Newton iteration on the gradient.
    """

    id = "potential"
    param_defaults: dict = {}

    def __init__(
        self,
        dim,
        minima_guess,
        *,
        params=None,
        laplacian_bound=math.inf,
        gradient_liminf=math.inf,
        search_box=None,
        saddle_guesses=None,
    ):
        self.dim = int(dim)
        if self.dim < 1:
            raise PotentialError("dimension must be positive")
        self.params = dict(params or {})
        self.laplacian_bound = float(laplacian_bound)
        # metadata only; nothing refuses a potential for violating it
        self.gradient_liminf = float(gradient_liminf)
        if search_box is None:
            search_box = (np.full(self.dim, -3.0), np.full(self.dim, 3.0))
        self.search_box = (np.asarray(search_box[0], float), np.asarray(search_box[1], float))
        self._shift = 0.0
        self._separators = None

        found = [self._refine_critical_point(np.atleast_1d(np.asarray(g, float))) for g in minima_guess]
        for m in found:
            if np.any(np.linalg.eigvalsh(self.hessian(m)) <= 0):
                raise PotentialError(f"minimum guess converged to a non-minimum critical point {m}")
        raw = [float(self._raw_energy(m[None, :])[0]) for m in found]
        order = sorted(range(len(found)), key=lambda i: (round(raw[i], 10), i))
        self._shift = raw[order[0]]
        self.minima = np.array([found[i] for i in order])
        self.minima_energies = np.array([raw[i] - self._shift for i in order])
        self.minima_energies[0] = 0.0
        self._saddle_guesses = saddle_guesses
        self.initial_energy_bound = self._cube_energy_bound()

    # -- subclass hooks -------------------------------------------------
    def _raw_energy(self, X):
        raise NotImplementedError

    def _raw_gradient(self, X):
        raise NotImplementedError

    def _raw_laplacian(self, X):
        return np.array([np.trace(self.hessian(x)) for x in X])

    # -- public evaluation ----------------------------------------------
    def energy(self, x):
        X, single = as_points(x, self.dim)
        e = self._raw_energy(X) - self._shift
        return float(e[0]) if single else e

    def gradient(self, x):
        X, single = as_points(x, self.dim)
        g = self._raw_gradient(X)
        return g[0] if single else g

    def laplacian(self, x):
        X, single = as_points(x, self.dim)
        lap = self._raw_laplacian(X)
        return float(lap[0]) if single else lap

    def hessian(self, x, h=1e-5):
        """Central-difference Hessian built from the analytic gradient."""
        x = np.asarray(x, dtype=float).reshape(self.dim)
        eye = np.eye(self.dim)
        pts = np.concatenate([x + h * eye, x - h * eye])
        g = self._raw_gradient(pts)
        H = (g[: self.dim] - g[self.dim:]) / (2 * h)
        return 0.5 * (H + H.T)

    __call__ = energy

    @property
    def n_minima(self):
        return len(self.minima)

    def describe(self):
        return {"id": self.id, "dim": self.dim, **self.params}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    # -- critical points ------------------------------------------------
    def _refine_critical_point(self, guess):
        sol = optimize.root(
            lambda y: self._raw_gradient(y[None, :])[0],
            guess,
            jac=self.hessian,
            method="hybr",
            options={"xtol": 1e-13},
        )
        x = sol.x
        if not np.all(np.isfinite(x)) or np.linalg.norm(self._raw_gradient(x[None, :])[0]) > 1e-8:
            raise PotentialError(f"critical point search from {guess} did not converge")
        return x

    def _cube_energy_bound(self, n=41):
        """max U over [-1, 1]^d, the default initial cloud."""
        axis = np.linspace(-1.0, 1.0, n if self.dim == 1 else max(9, 41 // self.dim))
        grid = np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"), -1).reshape(-1, self.dim)
        u = self.energy(grid)
        # polish the best node; an interior saddle can sit between nodes
        res = optimize.minimize(
            lambda x: -self.energy(x), grid[np.argmax(u)], jac=lambda x: -self.gradient(x),
            bounds=[(-1.0, 1.0)] * self.dim, method="L-BFGS-B",
        )
        return float(max(u.max(), -res.fun))

    def separators(self):
        """1-d only: sorted local maxima separating consecutive minima."""
        if self.dim != 1:
            raise LandscapeError("separators are only defined for one-dimensional potentials")
        if self._separators is None:
            xs = np.sort(self.minima[:, 0])
            seps = []
            for a, b in zip(xs[:-1], xs[1:]):
                grid = np.linspace(a, b, 4001)
                u = self.energy(grid[:, None])
                j = int(np.argmax(u))
                lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
                g = lambda t: float(self._raw_gradient(np.array([[t]]))[0, 0])
                if g(lo) > 0 > g(hi):
                    s = optimize.brentq(g, lo, hi, xtol=1e-14, rtol=1e-15)
                else:
                    s = grid[j]
                seps.append(s)
            self._separators = np.array(seps)
        return self._separators

    # -- basins ---------------------------------------------------------
    def basin_index(self, x, flow=None):
        """Basin labels (1-based) for one point or an ``(n, d)`` array.

        One-dimensional potentials use the separating maxima directly; other
        potentials integrate the descent flow unless a subclass knows better.
        """
        X, single = as_points(x, self.dim)
        if self.dim == 1:
            labels = self._basin_index_1d(X[:, 0])
        else:
            labels, _ = flow_basins(self, X, flow)
        return int(labels[0]) if single else labels

    def _basin_index_1d(self, x):
        seps = self.separators()
        by_position = np.argsort(self.minima[:, 0])  # interval j holds minimum by_position[j]
        interval = np.searchsorted(seps, x, side="left")
        labels = by_position[interval] + 1
        # exactly on a separator: lowest adjacent label, matching the flow tie-break
        on = np.isin(x, seps)
        if np.any(on):
            k = np.searchsorted(seps, x[on])
            labels[on] = np.minimum(by_position[k], by_position[k + 1]) + 1
        return labels


# ---------------------------------------------------------------------------
# descent-flow basin classification


def _snap(potential, Y, flow):
    d = np.linalg.norm(Y[:, None, :] - potential.minima[None, :, :], axis=-1)
    nearest = np.argmin(d, axis=1)
    return nearest, d[np.arange(len(Y)), nearest] < flow.snap_radius


def flow_endpoints(potential, X, flow=None):
    """Integrate the descent flow for every row of ``X`` until it stops.

    Returns ``(endpoints, labels, stalled)``: ``labels`` is the 1-based index
    of the minimum reached, 0 where the flow stalled away from every
    declared minimum.
    """
    flow = flow or FlowParams()
    Y = np.array(X, dtype=float, copy=True)
    labels = np.zeros(len(Y), dtype=int)
    active = np.ones(len(Y), dtype=bool)
    stalled = np.zeros(len(Y), dtype=bool)
    for _ in range(flow.max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Ya = Y[idx]
        g = potential.gradient(Ya)
        gnorm = np.linalg.norm(g, axis=1)
        nearest, close = _snap(potential, Ya, flow)
        done = gnorm < flow.grad_tol
        labels[idx[done & close]] = nearest[done & close] + 1
        stalled[idx[done & ~close]] = True
        active[idx[done]] = False
        move = ~done
        step = flow.dt * g[move]
        length = np.linalg.norm(step, axis=1)
        scale = np.minimum(1.0, flow.max_step / np.maximum(length, 1e-300))
        Y[idx[move]] = Ya[move] - step * scale[:, None]
    if np.any(active):
        raise BasinError(
            f"descent flow did not converge within {flow.max_steps} steps for {int(active.sum())} point(s)"
        )
    return Y, labels, stalled


def flow_basins(potential, X, flow=None):
    """Vectorised basin classification by the descent flow.

    Returns ``(labels, flagged)``.  A flow that stalls at an index-one saddle
    is pushed off along the unstable direction both ways and assigned the
    lowest label reached; such points are flagged.
    """
    flow = flow or FlowParams()
    X, _ = as_points(X, potential.dim)
    ends, labels, stalled = flow_endpoints(potential, X, flow)
    flagged = np.zeros(len(X), dtype=bool)
    for row in np.flatnonzero(stalled):
        y = ends[row]
        w, v = np.linalg.eigh(potential.hessian(y))
        if w[0] >= 0 or (len(w) > 1 and w[1] <= 0):
            raise BasinError(f"flow from {X[row]} stalled at a non-saddle critical point {y}")
        push = 1e-4 * v[:, 0]
        _, side, st = flow_endpoints(potential, np.stack([y + push, y - push]), flow)
        if np.any(st) or np.any(side == 0):
            raise BasinError(f"could not resolve the separatrix point {y}")
        labels[row] = int(side.min())
        flagged[row] = True
    return labels, flagged


def classify_basin(potential, x, flow=None):
    """Basin label (1-based) of a single point, by integrating the descent flow."""
    X, _ = as_points(x, potential.dim)
    labels, _ = flow_basins(potential, X[:1], flow)
    return int(labels[0])


# ---------------------------------------------------------------------------
# landscape summary


@dataclass(frozen=True)
class Saddle:
    wells: tuple  # 1-based labels of the two minima it connects
    point: np.ndarray
    height: float


@dataclass(frozen=True)
class LandscapeSummary:
    potential: Potential = field(repr=False)
    alpha: float
    saddles: tuple
    saddle_point: np.ndarray
    saddle_height: float
    energy_barrier: float

    @property
    def barrier_ratio(self):
        return self.saddle_height / self.energy_barrier

    @property
    def sublevel_height(self):
        """Energy allowance above each minimum that defines B_i."""
        return self.energy_barrier / (1.0 + self.alpha) ** 0.25

    @property
    def C_K(self):
        return self.energy_barrier / math.sqrt(1.0 + self.alpha)

    def in_B(self, x, i):
        X, single = as_points(x, self.potential.dim)
        ok = (self.potential.basin_index(X) == i) & (
            self.potential.energy(X) - self.potential.minima_energies[i - 1] <= self.sublevel_height
        )
        return bool(ok[0]) if single else ok

    def in_K(self, x):
        X, single = as_points(x, self.potential.dim)
        labels = self.potential.basin_index(X)
        excess = self.potential.energy(X) - self.potential.minima_energies[labels - 1]
        ok = excess <= self.sublevel_height
        return bool(ok[0]) if single else ok

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "saddle_point": self.saddle_point.tolist(),
            "saddle_height": self.saddle_height,
            "energy_barrier": self.energy_barrier,
            "barrier_ratio": self.barrier_ratio,
            "C_K": self.C_K,
            "saddles": [
                {"wells": list(s.wells), "point": s.point.tolist(), "height": s.height} for s in self.saddles
            ],
        }


def _check_index_one(potential, s):
    w = np.linalg.eigvalsh(potential.hessian(s))
    if not (w[0] < 0 and np.all(w[1:] > 0)):
        raise LandscapeError(f"critical point {s} is not an index-one saddle (Hessian eigenvalues {w})")


def _saddles_1d(potential):
    seps = potential.separators()
    by_position = np.argsort(potential.minima[:, 0])
    out = []
    for j, s in enumerate(seps):
        a, b = sorted((int(by_position[j]) + 1, int(by_position[j + 1]) + 1))
        out.append((a, b, np.array([s])))
    return out


def _saddles_nd(potential):
    out = []
    J = potential.n_minima
    for a, b in itertools.combinations(range(1, J + 1), 2):
        guess = None
        if potential._saddle_guesses is not None:
            guess = potential._saddle_guesses.get((a, b))
            if guess is None:
                continue
        else:
            # highest point on the straight segment, then Newton on the gradient
            t = np.linspace(0.0, 1.0, 2001)[:, None]
            seg = potential.minima[a - 1] * (1 - t) + potential.minima[b - 1] * t
            guess = seg[int(np.argmax(potential.energy(seg)))]
        try:
            s = potential._refine_critical_point(np.asarray(guess, float))
        except PotentialError as exc:
            raise LandscapeError(f"no saddle found between minima {a} and {b}") from exc
        out.append((a, b, s))
    return out


def landscape_summary(potential, alpha=1.0):
    """Saddles, saddle height, energy barrier and the B_i / K predicates.

    One-dimensional potentials locate saddles by grid search between
    neighbouring minima; higher-dimensional built-ins use declared saddle
    guesses (or the highest point on the connecting segment), refined by a
    Newton solve and checked to be index one.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if potential.n_minima < 2:
        raise LandscapeError("landscape summary needs at least two minima")
    raw = _saddles_1d(potential) if potential.dim == 1 else _saddles_nd(potential)
    if not raw:
        raise LandscapeError("no saddle found")
    saddles = []
    for a, b, s in raw:
        _check_index_one(potential, s)
        saddles.append(Saddle((a, b), s, potential.energy(s)))

    # minimax path height between wells 1 and 2: bottleneck over the saddle graph
    parent = list(range(potential.n_minima + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    crossing = None
    for sd in sorted(saddles, key=lambda s: s.height):
        parent[find(sd.wells[0])] = find(sd.wells[1])
        if find(1) == find(2):
            crossing = sd
            break
    if crossing is None:
        raise LandscapeError("minima 1 and 2 are not connected by any saddle")

    # shallowest escape over all wells; reduces to U(s_12) - U(x_2) for two wells
    barrier = math.inf
    for i in range(1, potential.n_minima + 1):
        adjacent = [s.height for s in saddles if i in s.wells]
        if adjacent:
            barrier = min(barrier, min(adjacent) - potential.minima_energies[i - 1])
    return LandscapeSummary(
        potential=potential,
        alpha=float(alpha),
        saddles=tuple(saddles),
        saddle_point=crossing.point,
        saddle_height=float(crossing.height),
        energy_barrier=float(barrier),
    )


# ---------------------------------------------------------------------------
# built-in potentials


class Quartic(Potential):
    """U(x) = (x^2 - 1)^2 + tilt * (x + 1) on R."""

    id = "quartic"
    param_defaults = {"tilt": 0.0}

    def __init__(self, tilt=0.0):
        self.tilt = float(tilt)
        super().__init__(
            1,
            [[-1.0], [1.0]],
            params={"tilt": self.tilt},
            laplacian_bound=44.0,  # |12x^2 - 4| on |x| <= 2
            gradient_liminf=math.inf,
            search_box=([-3.0], [3.0]),
        )

    def _raw_energy(self, X):
        x = X[:, 0]
        return (x * x - 1.0) ** 2 + self.tilt * (x + 1.0)

    def _raw_gradient(self, X):
        x = X[:, 0]
        return (4.0 * x * (x * x - 1.0) + self.tilt)[:, None]

    def _raw_laplacian(self, X):
        return 12.0 * X[:, 0] ** 2 - 4.0

    def hessian(self, x, h=None):
        x = np.asarray(x, float).reshape(1)
        return np.array([[12.0 * x[0] ** 2 - 4.0]])


class TiltedQuartic(Quartic):
    id = "tilted_quartic"
    param_defaults = {"tilt": 0.1}

    def __init__(self, tilt=0.1):
        super().__init__(tilt=tilt)


class DoubleWell2D(Potential):
    """U(x, y) = (x^2 - 1)^2 + omega * y^2 / 2."""

    id = "double_well_2d"
    param_defaults = {"omega": 1.0}

    def __init__(self, omega=1.0):
        self.omega = float(omega)
        if self.omega <= 0:
            raise PotentialError("omega must be positive")
        super().__init__(
            2,
            [[-1.0, 0.0], [1.0, 0.0]],
            params={"omega": self.omega},
            laplacian_bound=44.0 + self.omega,
            gradient_liminf=math.inf,
            search_box=([-3.0, -3.0], [3.0, 3.0]),
            saddle_guesses={(1, 2): [0.0, 0.0]},
        )

    def _raw_energy(self, X):
        x, y = X[:, 0], X[:, 1]
        return (x * x - 1.0) ** 2 + 0.5 * self.omega * y * y

    def _raw_gradient(self, X):
        x, y = X[:, 0], X[:, 1]
        return np.stack([4.0 * x * (x * x - 1.0), self.omega * y], axis=1)

    def _raw_laplacian(self, X):
        return 12.0 * X[:, 0] ** 2 - 4.0 + self.omega

    def hessian(self, x, h=None):
        x = np.asarray(x, float).reshape(2)
        return np.array([[12.0 * x[0] ** 2 - 4.0, 0.0], [0.0, self.omega]])

    def basin_index(self, x, flow=None):
        # the x-flow is decoupled from y, so the basins are the half-planes
        X, single = as_points(x, self.dim)
        left = 1 if self.minima[0, 0] < 0 else 2
        labels = np.where(X[:, 0] < 0, left, 3 - left)
        labels[X[:, 0] == 0] = 1
        return int(labels[0]) if single else labels


class GaussianMixture(Potential):
    """Negative log of an isotropic Gaussian mixture density in d <= 3."""

    id = "gaussian_mixture"
    param_defaults = {"dim": 2, "separation": 2.0, "sigma": 0.5, "weight": 0.5}

    def __init__(self, dim=2, separation=2.0, sigma=0.5, weight=0.5, means=None):
        dim = int(dim)
        if not 1 <= dim <= 3:
            raise PotentialError("gaussian_mixture supports 1 <= dim <= 3")
        if means is None:
            means = np.zeros((2, dim))
            means[0, 0], means[1, 0] = -separation / 2, separation / 2
            weights = np.array([weight, 1.0 - weight])
        else:
            means = np.asarray(means, float).reshape(-1, dim)
            weights = np.full(len(means), 1.0 / len(means))
        if np.any(weights <= 0):
            raise PotentialError("mixture weights must be positive")
        self.means = means
        self.sigma = float(sigma)
        self.log_weights = np.log(weights / weights.sum())
        half = 1.5 * separation + 4 * self.sigma
        super().__init__(
            dim,
            list(means),
            params={"dim": dim, "separation": float(separation), "sigma": self.sigma, "weight": float(weight)},
            # Delta U = d/s^2 - Var_r(x - mu)/s^4 with 0 <= Var_r <= separation^2 / 4
            laplacian_bound=max(dim / self.sigma**2, separation**2 / (4 * self.sigma**4) - dim / self.sigma**2),
            gradient_liminf=math.inf,
            search_box=(np.full(dim, -half), np.full(dim, half)),
        )

    def _log_terms(self, X):
        sq = np.sum((X[:, None, :] - self.means[None, :, :]) ** 2, axis=-1)
        return self.log_weights[None, :] - 0.5 * sq / self.sigma**2

    def _raw_energy(self, X):
        t = self._log_terms(X)
        m = t.max(axis=1)
        return -(m + np.log(np.exp(t - m[:, None]).sum(axis=1)))

    def _responsibilities(self, X):
        t = self._log_terms(X)
        t -= t.max(axis=1, keepdims=True)
        r = np.exp(t)
        return r / r.sum(axis=1, keepdims=True)

    def _raw_gradient(self, X):
        r = self._responsibilities(X)
        return (X - r @ self.means) / self.sigma**2

    def _raw_laplacian(self, X):
        r = self._responsibilities(X)
        diff = X[:, None, :] - self.means[None, :, :]
        second = np.sum(r * np.sum(diff**2, axis=-1), axis=1)
        first = np.sum((r[:, :, None] * diff).sum(axis=1) ** 2, axis=1)
        return self.dim / self.sigma**2 - (second - first) / self.sigma**4


class TripleWell(Potential):
    """U(x) = (x/s)^2 ((x/s)^2 - 3)^2 / 4 + tilt * x with s = spacing / sqrt(3).

    Minima at 0 and +-spacing, saddles at +-spacing/sqrt(3), barrier 1.
    """

    id = "triple_well"
    param_defaults = {"spacing": 2.0, "tilt": 0.0}

    def __init__(self, spacing=2.0, tilt=0.0):
        self.spacing = float(spacing)
        self.tilt = float(tilt)
        self._s = self.spacing / math.sqrt(3.0)
        super().__init__(
            1,
            [[0.0], [-self.spacing], [self.spacing]],
            params={"spacing": self.spacing, "tilt": self.tilt},
            laplacian_bound=float(abs(self._second(np.array([1.25 * self.spacing])))[0]),
            gradient_liminf=math.inf,
            search_box=([-2.0 * self.spacing], [2.0 * self.spacing]),
        )

    def _second(self, x):
        z = x / self._s
        return (30 * z**4 - 72 * z**2 + 18) / (4 * self._s**2)

    def _raw_energy(self, X):
        z = X[:, 0] / self._s
        return 0.25 * z * z * (z * z - 3.0) ** 2 + self.tilt * X[:, 0]

    def _raw_gradient(self, X):
        z = X[:, 0] / self._s
        # d/dz [z^6 - 6 z^4 + 9 z^2] / 4
        return ((6 * z**5 - 24 * z**3 + 18 * z) / (4 * self._s) + self.tilt)[:, None]

    def _raw_laplacian(self, X):
        return self._second(X[:, 0])

    def hessian(self, x, h=None):
        x = np.asarray(x, float).reshape(1)
        return np.array([[self._second(x)[0]]])


class Quadratic(Potential):
    """U(x) = omega |x|^2 / 2; the Ornstein-Uhlenbeck reference case."""

    id = "quadratic"
    param_defaults = {"dim": 1, "omega": 1.0}

    def __init__(self, dim=1, omega=1.0):
        self.omega = float(omega)
        if self.omega <= 0:
            raise PotentialError("omega must be positive")
        dim = int(dim)
        super().__init__(
            dim,
            [np.zeros(dim)],
            params={"dim": dim, "omega": self.omega},
            laplacian_bound=dim * self.omega,
            gradient_liminf=math.inf,
            search_box=(np.full(dim, -10.0), np.full(dim, 10.0)),
        )

    def _raw_energy(self, X):
        return 0.5 * self.omega * np.sum(X * X, axis=1)

    def _raw_gradient(self, X):
        return self.omega * X

    def _raw_laplacian(self, X):
        return np.full(len(X), self.dim * self.omega)

    def hessian(self, x, h=None):
        return self.omega * np.eye(self.dim)

    def basin_index(self, x, flow=None):
        X, single = as_points(x, self.dim)
        return 1 if single else np.ones(len(X), dtype=int)


POTENTIALS = {
    cls.id: cls for cls in (Quartic, TiltedQuartic, DoubleWell2D, GaussianMixture, TripleWell, Quadratic)
}


def make_potential(name, **params):
    """Build a registered potential from its string id and parameter map."""
    try:
        cls = POTENTIALS[name]
    except KeyError:
        raise UnknownPotentialError(
            f"unknown potential {name!r}; valid ids: {', '.join(sorted(POTENTIALS))}"
        ) from None
    unknown = set(params) - set(cls.param_defaults)
    if unknown:
        raise PotentialError(f"unknown parameter(s) for {name!r}: {', '.join(sorted(unknown))}")
    return cls(**params)
