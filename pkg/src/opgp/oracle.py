"""Grid discretization of the prior, used as an independent check.

The process is replaced by its finite-dimensional marginal on a uniform grid;
functionals become weight vectors (linear interpolation, trapezoid rule,
derivatives of local 5-node interpolants) and conditioning is plain Gaussian-vector
algebra. The quadrature here is deliberately different from the
Gauss-Legendre rule used by the main path.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import SingularGram, SiteOutOfGrid
from .functionals import weight_function
from .gram import jittered_cholesky


@dataclass(frozen=True)
class GridMeasure:
    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray

    @property
    def n(self):
        return self.grid.size

    @property
    def var(self):
        return np.diag(self.cov).copy()


@dataclass(frozen=True)
class FunctionalWeights:
    w: np.ndarray


def uniform_grid(domain, n):
    return np.linspace(domain[0], domain[1], n)


def discretize(k, m, n, domain=(-1.0, 1.0)):
    if n < 2:
        raise ValueError("grid needs at least 2 sites")
    grid = uniform_grid(domain, n)
    cov = k.matrix(grid, grid)
    return GridMeasure(grid, np.asarray(m(grid), dtype=float), 0.5 * (cov + cov.T))


def _interp_weights(x, grid, w, scale=1.0):
    """Add linear-interpolation weights of ``f(x)`` into ``w``."""
    n = grid.size
    i = int(np.clip(np.searchsorted(grid, x, side="right") - 1, 0, n - 2))
    h = grid[i + 1] - grid[i]
    t = (x - grid[i]) / h
    if np.isclose(t, 0.0, atol=1e-12):
        w[i] += scale
    elif np.isclose(t, 1.0, atol=1e-12):
        w[i + 1] += scale
    else:
        w[i] += scale * (1 - t)
        w[i + 1] += scale * t


def weights_for(f, grid):
    """Weight vector with ``f(g) ~= w . g(grid)`` for a function sampled on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    w = np.zeros(n)
    lo, hi = grid[0], grid[-1]
    tol = 1e-12 * (hi - lo)
    if f.kind == "integral":
        a, b = f.support
        if a < lo - tol or b > hi + tol:
            raise SiteOutOfGrid(f"support {f.support} outside grid [{lo}, {hi}]")
        wf = weight_function(f.weight, f.support)
        # trapezoid on the grid cells clipped to [a, b]
        inner = grid[(grid > a) & (grid < b)]
        pts = np.concatenate([[a], inner, [b]])
        vals = wf(pts)
        for left, right, wl, wr in zip(pts[:-1], pts[1:], vals[:-1], vals[1:]):
            half = 0.5 * (right - left)
            _interp_weights(left, grid, w, half * wl)
            _interp_weights(right, grid, w, half * wr)
        return FunctionalWeights(w)

    x = f.site
    if x < lo - tol or x > hi + tol:
        raise SiteOutOfGrid(f"site {x} outside grid [{lo}, {hi}]")
    if f.kind == "point":
        _interp_weights(x, grid, w)
        return FunctionalWeights(w)

    n_win = min(5, n)
    start = int(np.clip(np.searchsorted(grid, x) - n_win // 2, 0, n - n_win))
    w[start:start + n_win] = _lagrange_deriv_weights(grid[start:start + n_win], x)
    return FunctionalWeights(w)


def _lagrange_deriv_weights(nodes, x):
    """Weights of the derivative at ``x`` of the interpolant through ``nodes``."""
    h = nodes[1] - nodes[0]
    u = (nodes - x) / h
    m = u.size
    out = np.zeros(m)
    for j in range(m):
        for k in range(m):
            if k == j:
                continue
            term = 1.0 / (u[j] - u[k])
            for l in range(m):
                if l != j and l != k:
                    term *= (0.0 - u[l]) / (u[j] - u[l])
            out[j] += term
    return out / h


def stacked_weights(fs, grid):
    if not fs:
        return np.zeros((0, np.size(grid)))
    return np.vstack([weights_for(f, grid).w for f in fs])


def oracle_condition(gm, W, y):
    """Condition the grid measure on ``W f = y``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if W.shape[0] == 0:
        return gm
    cw, gain, mean = _gain(gm, W, y)
    cov = gm.cov - gain @ cw.T
    return GridMeasure(gm.grid, mean, 0.5 * (cov + cov.T))


def oracle_marginals(gm, W, y):
    """Posterior mean and pointwise variance of ``W f = y`` without the full covariance."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if W.shape[0] == 0:
        return gm.mean.copy(), gm.var
    cw, gain, mean = _gain(gm, W, y)
    return mean, gm.var - np.einsum("ij,ij->i", gain, cw)


def _gain(gm, W, y):
    cw = gm.cov @ W.T
    s = W @ cw
    chol, _ = jittered_cholesky(0.5 * (s + s.T), error=SingularGram)
    gain = cho_solve((chol, True), cw.T).T
    return cw, gain, gm.mean + gain @ (y - W @ gm.mean)


def sample(gm, count, seed=0):
    """``count`` draws from the grid measure, one per row.

    Uses a symmetric eigendecomposition square root (negative eigenvalues
    from roundoff are clipped to zero).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    vals, vecs = np.linalg.eigh(gm.cov)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, gm.n))
    return gm.mean + z @ root.T
