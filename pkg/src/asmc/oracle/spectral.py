"""Low-lying spectrum of the generator L f = -eps Lap f + grad U . grad f.

The generator is discretised on cells with the square-root approximation:
the rate between neighbouring cells i, j is (eps/h^2) exp(-(U_j - U_i)/(2 eps)).
The rates are reversible for the cell Gibbs weights, which gives a symmetric
matrix with constant off-diagonal -eps/h^2.  Zero-flux walls keep the
constants in the kernel exactly.

The metastable eigenvalues can sit far below machine epsilon times the
matrix norm, so a dense solve alone cannot resolve them.  In one
dimension they are refined by inverse subspace iteration with an exact
flux-based solve and a Rayleigh-Ritz step on the Dirichlet form, both of
which only add positive quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse
from scipy.special import logsumexp
from scipy.sparse import linalg as splinalg

from .grid import GridSpec, truncated_domain


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True)
class CellGrid:
    """Cell-centred grid: ``n`` cells per axis on the box [lower, upper]."""

    lower: tuple
    upper: tuple
    n: int

    @property
    def dim(self):
        return len(self.lower)

    @property
    def spacing(self):
        return tuple((b - a) / self.n for a, b in zip(self.lower, self.upper))

    def centres(self):
        axes = [a + (np.arange(self.n) + 0.5) * h for a, h in zip(self.lower, self.spacing)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.dim)

    def to_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper), "n": self.n}


def default_cells(potential, eps, n=None, max_level=600.0):
    """Cells on the truncated domain, with the padding reduced until
    exp(-U/eps) stays above underflow (U <= max_level * eps) on the box."""
    for pad in (0.2, 0.1, 0.05, 0.02, 0.0):
        box = truncated_domain(potential, eps, pad=pad)
        if np.max(potential.energy(box.nodes(201 if potential.dim == 1 else 41))) <= max_level * eps:
            break
    if n is None:
        n = 2000 if potential.dim == 1 else 120
    return CellGrid(box.lower, box.upper, n)


@dataclass
class SpectralSummary:
    eps: float
    grid: CellGrid
    eigenvalues: np.ndarray
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)  # cell Gibbs probabilities
    eigenfunctions: np.ndarray = field(repr=False)  # (n_cells, n_modes), pi-orthonormal
    labels: np.ndarray | None = field(default=None, repr=False)
    n_wells: int = 1

    @property
    def psi2(self):
        return self.eigenfunctions[:, 1]

    @property
    def lambda2(self):
        return float(self.eigenvalues[1])

    @property
    def Lambda(self):
        """First eigenvalue above the metastable cluster, lambda_{J+1}."""
        if len(self.eigenvalues) <= self.n_wells:
            return math.nan
        return float(self.eigenvalues[self.n_wells])

    def well_masses(self):
        if self.labels is None:
            return np.array([1.0])
        return np.array([self.weights[self.labels == j].sum() for j in range(1, self.n_wells + 1)])

    def coefficients(self):
        """Plateau values a_i of psi_2 on each well.

        Two wells: the solution of sum a_i p_i = 0, sum a_i^2 p_i = 1 with
        a_1 > 0.  More wells: the pi-average of psi_2 over each basin.
        """
        p = self.well_masses()
        if self.n_wells == 2:
            p1, p2 = p
            return np.array([math.sqrt(p2 / (p1 * (p1 + p2))), -math.sqrt(p1 / (p2 * (p1 + p2)))])
        if self.n_wells < 2:
            return None
        psi = self.psi2
        return np.array(
            [np.sum(self.weights[m] * psi[m]) / self.weights[m].sum() for m in (self.labels == j for j in range(1, self.n_wells + 1))]
        )

    def C_psi(self, landscape):
        """sup over cells in K of |psi_2|."""
        mask = landscape.in_K(self.nodes)
        return float(np.max(np.abs(self.psi2[mask])))

    def orthogonality_defect(self, k=4):
        k = min(k, self.eigenfunctions.shape[1])
        V = self.eigenfunctions[:, :k]
        G = V.T @ (self.weights[:, None] * V)
        return float(np.max(np.abs(G - np.eye(k))))

    def transition_ratio(self, x, t):
        """Truncated expansion sum_k exp(-lambda_k t) psi_k(x)^2 of p_t(x,x)/pi(x)."""
        j = int(np.argmin(np.linalg.norm(self.nodes - np.atleast_1d(x), axis=1)))
        return float(np.sum(np.exp(-self.eigenvalues * t) * self.eigenfunctions[j] ** 2))

    def to_dict(self, landscape=None):
        out = {
            "eps": self.eps,
            "grid": self.grid.to_dict(),
            "eigenvalues": self.eigenvalues.tolist(),
            "Lambda": self.Lambda,
            "n_wells": self.n_wells,
        }
        a = self.coefficients()
        out["coefficients"] = None if a is None else a.tolist()
        if landscape is not None:
            out["C_psi"] = self.C_psi(landscape)
            out["flatness"] = eigenfunction_flatness(self, landscape)
        return out


# ---------------------------------------------------------------------------
# discretisation


def _edges(shape):
    """Index pairs of neighbouring cells, one block per axis."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    out = []
    for ax in range(len(shape)):
        a = np.take(idx, np.arange(shape[ax] - 1), axis=ax).ravel()
        b = np.take(idx, np.arange(1, shape[ax]), axis=ax).ravel()
        out.append((ax, a, b))
    return out


def _discretise(potential, eps, grid):
    X = grid.centres()
    U = potential.energy(X)
    logpi = -U / eps
    logpi -= logsumexp(logpi)
    pi = np.exp(logpi)
    shape = (grid.n,) * grid.dim
    n = len(X)
    diag = np.zeros(n)
    rows, cols, vals = [], [], []
    cond = []  # (a, b, pi_a q_ab) for the Dirichlet form
    for ax, a, b in _edges(shape):
        r = eps / grid.spacing[ax] ** 2
        du = (U[b] - U[a]) / (2 * eps)
        diag[a] += r * np.exp(-du)
        diag[b] += r * np.exp(du)
        rows += [a, b]
        cols += [b, a]
        vals += [np.full(len(a), -r)] * 2
        cond.append((a, b, r * np.exp(0.5 * (logpi[a] + logpi[b]))))  # sqrt(pi_a pi_b) without underflow
    return X, U, pi, diag, (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)), cond


def _dirichlet(cond, F, G):
    out = 0.0
    for a, b, w in cond:
        out = out + (F[a] - F[b]).T @ (w[:, None] * (G[a] - G[b]))
    return out


def _pi_orthonormalise(V, pi, against=None):
    if against is not None:
        V = V - against @ (against.T @ (pi[:, None] * V))
    V = V - np.sum(pi[:, None] * V, axis=0)  # remove constants
    G = V.T @ (pi[:, None] * V)
    C = np.linalg.cholesky(0.5 * (G + G.T))
    return linalg.solve_triangular(C, V.T, lower=True).T


def _flux_solve(pi, w, g):
    """Solve L f = g on a 1-d chain, for pi-mean-zero g and conductances w."""
    s = pi * g
    s = s - pi * s.sum()
    left = -np.cumsum(s)[:-1]
    right = np.cumsum(s[::-1])[::-1][1:]
    err_left = np.cumsum(np.abs(s))[:-1]
    err_right = np.cumsum(np.abs(s)[::-1])[::-1][1:]
    F = np.where(err_left <= err_right, left, right)
    f = np.concatenate([[0.0], np.cumsum(F / w)])
    return f - np.sum(pi * f)


def _refine_1d(pi, cond, V, max_iter=30, tol=1e-13):
    w = cond[0][2]
    lam_old = None
    for _ in range(max_iter):
        V = _pi_orthonormalise(np.column_stack([_flux_solve(pi, w, v) for v in V.T]), pi)
        E = _dirichlet(cond, V, V)
        lam, C = linalg.eigh(0.5 * (E + E.T))
        V = V @ C
        if lam_old is not None and np.all(np.abs(lam - lam_old) <= tol * np.abs(lam)):
            break
        lam_old = lam
    return lam, V


def spectral_solve(potential, eps, grid=None, n_modes=6, landscape=None, refine=True):
    """Lowest ``n_modes`` eigenpairs of the generator on a truncated box.

    Eigenfunctions are returned as cell values normalised in L^2(pi) with
    psi_2 positive on the global-minimum basin.  With more than one
    minimum, the cluster of ``J - 1`` metastable eigenvalues is refined
    (one-dimensional grids only).
    """
    if not 2 <= n_modes <= 50:
        raise ValueError("n_modes must lie in [2, 50]")
    if potential.dim > 2:
        raise ValueError("the spectral solver supports d <= 2")
    if grid is None:
        grid = default_cells(potential, eps)
    elif isinstance(grid, GridSpec):
        grid = CellGrid(grid.lower, grid.upper, grid.n)
    X, U, pi, diag, (rows, cols, vals), cond = _discretise(potential, eps, grid)
    n = len(X)
    if n_modes >= n:
        raise ValueError("grid too coarse for the requested number of modes")

    if grid.dim == 1:
        lam, v = linalg.eigh_tridiagonal(diag, np.full(n - 1, vals[0]), select="i", select_range=(0, n_modes - 1))
    else:
        S = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n)) + sparse.diags(diag)
        shift = -1e-6 * float(diag.max())
        try:
            lam, v = splinalg.eigsh(S, k=n_modes, sigma=shift, which="LM")
        except splinalg.ArpackNoConvergence as exc:
            raise SpectralError("sparse eigensolver did not converge") from exc
        order = np.argsort(lam)
        lam, v = lam[order], v[:, order]
    psi = v / np.sqrt(pi)[:, None]

    J = potential.n_minima
    slow = min(J - 1, n_modes - 1)
    fast = psi[:, 1 + slow:]
    # the dense solve has absolute accuracy ~ eps_mach * |S|; only tiny eigenvalues need refining
    tiny = slow > 0 and lam[slow] < 1e-6 * float(diag.max())
    if tiny and refine and grid.dim == 1:
        lam_slow, V = _refine_1d(pi, cond, psi[:, 1:1 + slow])
    else:
        V = _pi_orthonormalise(psi[:, 1:1 + slow], pi) if slow else psi[:, 1:1]
        E = _dirichlet(cond, V, V) if slow else np.zeros((0, 0))
        lam_slow, C = linalg.eigh(0.5 * (E + E.T)) if slow else (np.zeros(0), None)
        if slow:
            V = V @ C
    if fast.shape[1]:
        fast = _pi_orthonormalise(fast, pi, against=V)
        Ef = _dirichlet(cond, fast, fast)
        lam_fast, C = linalg.eigh(0.5 * (Ef + Ef.T))
        fast = fast @ C
    else:
        lam_fast = np.zeros(0)
    eigvals = np.concatenate([[0.0], lam_slow, lam_fast])
    funcs = np.column_stack([np.ones(n), V, fast])

    labels = potential.basin_index(X) if J > 1 else None
    if labels is not None:
        # positive on the global-minimum basin; if psi_2 averages to zero
        # there (symmetric wells), the next basin decides
        for j in range(1, J + 1):
            mean = np.sum((pi * funcs[:, 1])[labels == j])
            if abs(mean) > 1e-8:
                if mean < 0:
                    funcs[:, 1] *= -1
                break
    if np.any(np.diff(eigvals) < -1e-9 * max(1.0, abs(eigvals[-1]))):
        raise SpectralError("eigenvalues came out unordered; refine the grid")
    return SpectralSummary(float(eps), grid, eigvals, X, pi, funcs, labels, J)


def eigenfunction_flatness(summary, landscape):
    """max over wells of sup over cells in B_i of |psi_2 - a_i|."""
    a = summary.coefficients()
    if a is None:
        raise ValueError("flatness needs at least two wells")
    dev = 0.0
    for i in range(1, summary.n_wells + 1):
        mask = landscape.in_B(summary.nodes, i)
        if mask.any():
            dev = max(dev, float(np.max(np.abs(summary.psi2[mask] - a[i - 1]))))
    return dev


def spectral_gap_sweep(potential, eps_values, n_modes=6, grid_cells=None):
    """lambda_2 and Lambda over a list of temperatures."""
    rows = []
    for eps in eps_values:
        s = spectral_solve(potential, eps, default_cells(potential, eps, grid_cells), n_modes)
        rows.append({"eps": float(eps), "lambda2": s.lambda2, "Lambda": s.Lambda, "eigenvalues": s.eigenvalues.tolist()})
    return rows


def arrhenius_slope(eps_values, lambda2):
    """Least-squares slope of log(lambda_2) against -1/eps."""
    x = -1.0 / np.asarray(eps_values, float)
    y = np.log(np.asarray(lambda2, float))
    return float(np.polyfit(x, y, 1)[0])
