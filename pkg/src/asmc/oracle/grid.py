"""Quadrature for Gibbs integrals on a truncated domain.

One-dimensional integrals are split at the basin separators and at the
edges of the sets B_i, so every piece has a smooth integrand and composite
Simpson converges at its full order.  In two and three dimensions a tensor
Simpson rule on a node grid is refined by doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize


class QuadratureError(RuntimeError):
    """Grid refinement did not reach the requested tolerance."""


# node caps per axis for the doubling loop
MAX_NODES = {1: 2**20 + 1, 2: 1025, 3: 129}


@dataclass(frozen=True)
class GridSpec:
    lower: tuple
    upper: tuple
    n: int = 401

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same length")
        if any(b <= a for a, b in zip(self.lower, self.upper)):
            raise ValueError("grid extent must be positive along every axis")
        if self.n < 3:
            raise ValueError("need at least 3 nodes per axis")

    @property
    def dim(self):
        return len(self.lower)

    @property
    def spacing(self):
        return tuple((b - a) / (self.n - 1) for a, b in zip(self.lower, self.upper))

    def axes(self, n=None):
        n = self.n if n is None else n
        return [np.linspace(a, b, n) for a, b in zip(self.lower, self.upper)]

    def nodes(self, n=None):
        axes = self.axes(n)
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.dim)

    def with_nodes(self, n):
        return GridSpec(self.lower, self.upper, n)

    def to_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper), "n": self.n}


def truncated_domain(potential, eps, level=40.0, pad=0.2, n=None):
    """Bounding box of {U <= U_min + level*eps}, widened by ``pad`` of its width per side.

    Starts from the potential's search box and doubles it while the
    sublevel set touches the edge.  The box is then widened further if the
    Gibbs mass in its outer rim exceeds 1e-10.
    """
    d = potential.dim
    lo, hi = (np.array(b, float) for b in potential.search_box)
    probe = {1: 4001, 2: 201, 3: 61}.get(d)
    if probe is None:
        raise ValueError("quadrature is limited to d <= 3")
    for _ in range(12):
        axes = [np.linspace(a, b, probe) for a, b in zip(lo, hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
        inside = (potential.energy(pts) <= level * eps).reshape((probe,) * d)
        if not inside.any():
            raise QuadratureError("sublevel set not resolved by the probe grid")
        touches = False
        box_lo, box_hi = np.empty(d), np.empty(d)
        for k in range(d):
            other = tuple(j for j in range(d) if j != k)
            idx = np.flatnonzero(inside.any(axis=other) if other else inside)
            touches |= idx[0] == 0 or idx[-1] == probe - 1
            step = axes[k][1] - axes[k][0]
            box_lo[k], box_hi[k] = axes[k][idx[0]] - step, axes[k][idx[-1]] + step
        if not touches:
            break
        centre, half = (lo + hi) / 2, (hi - lo)
        lo, hi = centre - half, centre + half
    else:
        raise QuadratureError("sublevel set keeps touching the search box; is U confining?")

    width = box_hi - box_lo
    for _ in range(6):
        grid = GridSpec(tuple(box_lo - pad * width), tuple(box_hi + pad * width), n or 401)
        if _rim_mass(potential, eps, grid) <= 1e-10:
            return grid
        pad *= 2
    raise QuadratureError("boundary mass stays above 1e-10")


def _rim_mass(potential, eps, grid):
    """Fraction of grid mass in the outer 5% along any axis (coarse check)."""
    m = 201 if grid.dim == 1 else 61
    pts = grid.nodes(m)
    w = np.exp(-potential.energy(pts) / eps)
    lo, hi = np.array(grid.lower), np.array(grid.upper)
    rel = (pts - lo) / (hi - lo)
    rim = np.any((rel < 0.05) | (rel > 0.95), axis=1)
    return float(w[rim].sum() / w.sum())


# ---------------------------------------------------------------------------
# one-dimensional piecewise Simpson


def _simpson_piece(f, a, b, n):
    x = np.linspace(a, b, n)
    # pieces end at jumps of h; take one-sided limits rather than the value on the jump
    inner = x.copy()
    inner[0] += 1e-12 * (b - a)
    inner[-1] -= 1e-12 * (b - a)
    return float(integrate.simpson(f(inner), x=x))


def _piece_integrals(f, edges, resolution=None, rtol=1e-10, scale=None):
    """Composite Simpson on each [edges[j], edges[j+1]].

    With ``resolution`` the node count per piece is fixed; otherwise nodes
    are doubled from 65 until the change is below ``rtol`` times the
    piece's ``scale`` integrand (defaults to ``f`` itself).
    """
    out = np.empty(len(edges) - 1)
    for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if b <= a:
            out[j] = 0.0
            continue
        if resolution is not None:
            out[j] = _simpson_piece(f, a, b, resolution)
            continue
        n, prev = 65, _simpson_piece(f, a, b, 65)
        while True:
            n = 2 * n - 1
            if n > MAX_NODES[1]:
                raise QuadratureError(f"Simpson on [{a:.4g}, {b:.4g}] did not converge")
            cur = _simpson_piece(f, a, b, n)
            ref = abs(cur) if scale is None else abs(_simpson_piece(scale, a, b, n))
            if abs(cur - prev) <= rtol * ref or (cur == 0.0 and prev == 0.0):
                break
            prev = cur
        out[j] = cur
    return out


def _edges_1d(potential, grid, landscape=None, extra=()):
    a, b = grid.lower[0], grid.upper[0]
    pts = [a, b, *potential.minima[:, 0]]
    if potential.n_minima > 1:
        pts.extend(potential.separators())
    if landscape is not None:
        pts.extend(sublevel_edges(potential, landscape, grid))
    pts.extend(extra)
    pts = np.unique(np.clip(np.asarray(pts, float), a, b))
    return pts


def sublevel_edges(potential, landscape, grid):
    """Endpoints of the intervals B_i of a one-dimensional potential."""
    out = []
    seps = list(potential.separators()) if potential.n_minima > 1 else []
    order = np.argsort(potential.minima[:, 0])
    bounds = [grid.lower[0], *seps, grid.upper[0]]
    for slot, i in enumerate(order):
        m = potential.minima[i, 0]
        top = potential.minima_energies[i] + landscape.sublevel_height
        g = lambda t: potential.energy(np.array([[t]]))[0] - top
        for end in (bounds[slot], bounds[slot + 1]):
            if g(end) > 0:
                out.append(optimize.brentq(g, min(m, end), max(m, end), xtol=1e-14, rtol=1e-15))
    return out


def _boltzmann(potential, eps, h=None):
    if h is None:
        return lambda x: np.exp(-potential.energy(x[:, None]) / eps)
    return lambda x: h(x[:, None]) * np.exp(-potential.energy(x[:, None]) / eps)


# ---------------------------------------------------------------------------
# tensor Simpson in d = 2, 3


def _simpson_weights(n, step):
    w = np.ones(n)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    return w * step / 3.0


def _tensor_weights(grid, n):
    ws = [_simpson_weights(n, (b - a) / (n - 1)) for a, b in zip(grid.lower, grid.upper)]
    W = ws[0]
    for w in ws[1:]:
        W = np.multiply.outer(W, w)
    return W.reshape(-1)


def _tensor_integral(potential, eps, grid, h=None, resolution=None, rtol=1e-8):
    def at(n):
        pts = grid.nodes(n)
        base = np.exp(-potential.energy(pts) / eps)
        val = base if h is None else h(pts) * base
        W = _tensor_weights(grid, n)
        return float(W @ val), float(W @ np.abs(val))

    if resolution is not None:
        return at(resolution)[0]
    n = 65
    prev, _ = at(n)
    while True:
        n = 2 * n - 1
        if n > MAX_NODES[grid.dim]:
            raise QuadratureError(f"tensor Simpson did not converge below {MAX_NODES[grid.dim]} nodes per axis")
        cur, scale = at(n)
        if abs(cur - prev) <= rtol * scale:
            return cur
        prev = cur


# ---------------------------------------------------------------------------
# public quadrature


def _domain(potential, eps, grid):
    return truncated_domain(potential, eps) if grid is None else grid


def grid_partition_function(potential, eps, grid=None, rtol=1e-10, resolution=None):
    """Z = integral of exp(-U/eps) over the truncated domain (U shifted so min U = 0)."""
    grid = _domain(potential, eps, grid)
    if grid.dim == 1:
        edges = _edges_1d(potential, grid)
        return float(_piece_integrals(_boltzmann(potential, eps), edges, resolution, rtol).sum())
    return _tensor_integral(potential, eps, grid, resolution=resolution, rtol=rtol)


def grid_expectation(potential, eps, h, grid=None, breakpoints=(), rtol=1e-10, resolution=None):
    """Integral of h against pi_eps.

    ``h`` maps an ``(n, d)`` array to ``n`` values.  In one dimension the
    basin separators are always used as breakpoints; pass the locations of
    any other jumps of ``h`` as ``breakpoints``.
    """
    grid = _domain(potential, eps, grid)
    Z = grid_partition_function(potential, eps, grid, rtol, resolution)
    if grid.dim == 1:
        edges = _edges_1d(potential, grid, extra=breakpoints)
        absh = lambda x: np.abs(h(x[:, None])) * np.exp(-potential.energy(x[:, None]) / eps)
        val = _piece_integrals(_boltzmann(potential, eps, h), edges, resolution, rtol, scale=absh)
        return float(val.sum() / Z)
    return _tensor_integral(potential, eps, grid, h, resolution, rtol) / Z


def laplace_partition_function(potential, eps):
    """Sum over minima of (2 pi eps)^{d/2} det(Hess)^{-1/2} exp(-U_i/eps)."""
    total = 0.0
    for m, u in zip(potential.minima, potential.minima_energies):
        det = float(np.linalg.det(potential.hessian(m)))
        total += (2 * math.pi * eps) ** (potential.dim / 2) / math.sqrt(det) * math.exp(-u / eps)
    return total


@dataclass
class GibbsReference:
    eps: float
    grid: GridSpec
    Z: float
    nodes: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    well_masses: np.ndarray
    mass_outside_K: float | None

    @property
    def C_m(self):
        """Smallest C with pi(Omega_i) >= 1/C^2 for every well."""
        return float(1.0 / math.sqrt(np.min(self.well_masses)))

    def C_P(self, C_K):
        """Empirical constant in pi(K^c) <= C_P exp(-C_K/eps)."""
        if self.mass_outside_K is None:
            return None
        return self.mass_outside_K * math.exp(C_K / self.eps)

    def to_dict(self):
        return {
            "eps": self.eps,
            "grid": self.grid.to_dict(),
            "Z": self.Z,
            "well_masses": self.well_masses.tolist(),
            "mass_outside_K": self.mass_outside_K,
            "C_m": self.C_m,
        }


def _well_masses_1d(potential, eps, landscape, grid, resolution, rtol):
    edges = _edges_1d(potential, grid, landscape)
    P = _piece_integrals(_boltzmann(potential, eps), edges, resolution, rtol)
    mids = ((edges[:-1] + edges[1:]) / 2)[:, None]
    labels = potential.basin_index(mids) if potential.n_minima > 1 else np.ones(len(mids), int)
    Z = P.sum()
    masses = np.array([P[labels == j].sum() for j in range(1, potential.n_minima + 1)]) / Z
    outside = None if landscape is None else float(P[~landscape.in_K(mids)].sum() / Z)
    return Z, masses, outside


def _well_masses_nd(potential, eps, landscape, grid, resolution):
    n = resolution or min(grid.n, 257)
    pts = grid.nodes(n)
    w = _tensor_weights(grid, n) * np.exp(-potential.energy(pts) / eps)
    Z = w.sum()
    labels = potential.basin_index(pts)
    masses = np.array([w[labels == j].sum() for j in range(1, potential.n_minima + 1)]) / Z
    outside = None if landscape is None else float(w[~landscape.in_K(pts)].sum() / Z)
    return Z, masses, outside


def well_masses(potential, eps, landscape=None, grid=None, resolution=None, rtol=1e-10):
    """Gibbs mass of every basin and, given a landscape, of the complement of K.

    The complement mass is integrated directly rather than as 1 - pi(K),
    so it stays accurate when it is far below machine epsilon.
    """
    grid = _domain(potential, eps, grid)
    if grid.dim == 1:
        _, masses, outside = _well_masses_1d(potential, eps, landscape, grid, resolution, rtol)
    else:
        _, masses, outside = _well_masses_nd(potential, eps, landscape, grid, resolution)
    return masses, outside


def gibbs_reference(potential, eps, landscape=None, grid=None, resolution=None, rtol=1e-10):
    """Partition function, normalised node density and well masses in one record."""
    grid = _domain(potential, eps, grid)
    if grid.dim == 1:
        Z, masses, outside = _well_masses_1d(potential, eps, landscape, grid, resolution, rtol)
    else:
        Z = _tensor_integral(potential, eps, grid, resolution=resolution, rtol=max(rtol, 1e-8))
        _, masses, outside = _well_masses_nd(potential, eps, landscape, grid, resolution)
    nodes = grid.nodes()
    density = np.exp(-potential.energy(nodes) / eps) / Z
    return GibbsReference(eps, grid, float(Z), nodes, density, masses, outside)


def sample_from_grid(reference, n, rng):
    """Draw ``n`` points from the node density (cell-jittered in 1-d)."""
    p = reference.density / reference.density.sum()
    idx = rng.choice(len(p), size=n, p=p)
    pts = reference.nodes[idx].copy()
    step = np.array(reference.grid.spacing)
    pts += (rng.random(pts.shape) - 0.5) * step
    return pts
