"""Batch conditioning of a GP prior on exact (or noisy) functional data.

The posterior mean is kept in analytic form,
``m(s) + sum_i alpha_i * G_i k(., s)``, so any functional (including
derivatives) can be applied to it exactly.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DimensionMismatch
from .functionals import apply, section_matrix
from .gram import build_gram, cross_covariance, representing_sequence


@dataclass(frozen=True)
class PosteriorGP:
    kernel: object
    mean: object
    sys: object
    values: np.ndarray
    alpha: np.ndarray

    @property
    def functionals(self):
        return self.sys.functionals

    def mean_function(self):
        return PosteriorMean(self.kernel, self.mean, self.sys.functionals, self.alpha)


class PosteriorMean:
    """Callable ``m(s) + sum_i alpha_i G_i k(., s)`` with a derivative."""

    def __init__(self, kernel, mean, functionals, alpha):
        self.kernel = kernel
        self.mean = mean
        self.functionals = tuple(functionals)
        self.alpha = np.asarray(alpha, dtype=float)

    def _eval(self, s, dt):
        s = np.asarray(s, dtype=float)
        prior = self.mean(s) if dt == 0 else self.mean.derivative(s)
        if not self.functionals:
            return prior
        upd = self.alpha @ section_matrix(self.functionals, self.kernel, np.ravel(s), dt)
        return prior + upd.reshape(s.shape)

    def __call__(self, s):
        return self._eval(s, 0)

    def derivative(self, s):
        return self._eval(s, 1)


def condition(k, m, fs, y):
    fs = tuple(fs)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != len(fs):
        raise DimensionMismatch(f"{len(fs)} functionals but {y.size} values")
    sys = build_gram(k, m, fs)
    if sys.p == 0:
        alpha = np.zeros(0)
    else:
        alpha = cho_solve((sys.chol, True), y - sys.gm)
    return PosteriorGP(k, m, sys, y, alpha)


def posterior_mean(pg, s):
    out = pg.mean_function()(s)
    return float(out) if np.ndim(s) == 0 else out


def _whitened(pg, s):
    """``L^{-1} K_Gs`` as a (p, n) matrix."""
    ksg = section_matrix(pg.functionals, pg.kernel, np.atleast_1d(s))
    if pg.sys.p == 0:
        return ksg
    return solve_triangular(pg.sys.chol, ksg, lower=True)


def posterior_cov(pg, s1, s2):
    """Posterior covariance; scalar for scalar inputs, else a len(s1) x len(s2) matrix."""
    v1, v2 = _whitened(pg, s1), _whitened(pg, s2)
    out = pg.kernel.matrix(np.atleast_1d(s1), np.atleast_1d(s2)) - v1.T @ v2
    if np.ndim(s1) == 0 and np.ndim(s2) == 0:
        return float(out[0, 0])
    return out


def posterior_var(pg, s):
    v = _whitened(pg, s)
    out = pg.kernel.diag(np.atleast_1d(s)) - np.sum(v * v, axis=0)
    return float(out[0]) if np.ndim(s) == 0 else out


def posterior_via_representing(pg, s, s2=None):
    """Mean (``s2 is None``) or covariance from the representing-sequence sums.

    Evaluates ``m + sum_i <y - Gm, y_i> (C G* y_i)`` and
    ``k - sum_i (C G* y_i)(s1) (C G* y_i)(s2)`` with ``y_i = K_GG^{-1/2} e_i``;
    independent of the Cholesky path used by :func:`posterior_mean`.
    """
    rep = representing_sequence(pg.sys)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    # column i of b holds (C G* y_i)(s) for every s
    b = cross_covariance(pg.sys, pg.kernel, s_arr) @ rep.T
    if s2 is None:
        coef = rep @ (pg.values - pg.sys.gm)
        out = pg.mean(s_arr) + b @ coef
        return float(out[0]) if np.ndim(s) == 0 else out
    s2_arr = np.atleast_1d(np.asarray(s2, dtype=float))
    b2 = cross_covariance(pg.sys, pg.kernel, s2_arr) @ rep.T
    out = pg.kernel.matrix(s_arr, s2_arr) - b @ b2.T
    if np.ndim(s) == 0 and np.ndim(s2) == 0:
        return float(out[0, 0])
    return out


def fiber_check(pg):
    """Residuals ``G_i[posterior mean] - y_i``."""
    mf = pg.mean_function()
    return np.array([apply(f, mf) for f in pg.functionals], dtype=float) - pg.values
