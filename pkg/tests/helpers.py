"""Independent reference computations used by the tests."""
import numpy as np

from opgp import Kernel, LinearFunctional, MeanFunction, apply, fourier_functionals
from opgp.config import TRUE_FUNCTIONS
from opgp.functionals import gram_matrix

FIG2_SITES = (-0.6, 0.15, 0.7)


def fig2_functionals(quad_order=200):
    return ([LinearFunctional.point(s) for s in FIG2_SITES]
            + [LinearFunctional.integral(quad_order=quad_order)]
            + fourier_functionals(2, quad_order=quad_order)
            + [LinearFunctional.deriv(0.0)])


def fig2_problem():
    k = Kernel("matern52", 0.4, 1.0)
    m = MeanFunction.zero()
    fs = fig2_functionals()
    truth = TRUE_FUNCTIONS["demo"]
    y = np.array([apply(f, truth) for f in fs])
    return k, m, fs, y


def central_diff(fn, x, h=1e-5):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def mixed_central_diff(k, s, t, h=1e-5):
    """d/ds d/dt k(s, t) by a 4-point central stencil on kernel values."""
    return (k(s + h, t + h) - k(s + h, t - h) - k(s - h, t + h) + k(s - h, t - h)) / (4 * h * h)


def trapezoid(fn, a, b, n=10**6):
    x = np.linspace(a, b, n)
    y = fn(x)
    h = (b - a) / (n - 1)
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))


def textbook_gp(kern, mean, sites, y, query):
    """Pointwise GP regression with a plain dense solve."""
    sites = np.asarray(sites, dtype=float)
    K = np.array([[kern(a, b) for b in sites] for a in sites])
    Ks = np.array([[kern(q, a) for a in sites] for q in query])
    mu = mean(np.asarray(query)) + Ks @ np.linalg.solve(K, y - mean(sites))
    cov = (np.array([[kern(a, b) for b in query] for a in query])
           - Ks @ np.linalg.solve(K, Ks.T))
    return mu, cov


def random_functional_set(rng, size, domain=(-1.0, 1.0), max_cond=1e7, quad_order=200):
    """Random mix of point, derivative and integral functionals.

    Sets whose prior Gram (under a Matern 5/2, lengthscale 0.4) has condition
    number above ``max_cond`` are redrawn so the comparisons are not dominated
    by roundoff amplification.
    """
    k = Kernel("matern52", 0.4, 1.0)
    a, b = domain
    weights = ["one", "cos1", "sin1", "cos2", "x1"]
    while True:
        fs = []
        for _ in range(size):
            kind = rng.choice(["point", "point", "deriv", "integral"])
            if kind == "integral":
                lo, hi = np.sort(rng.uniform(a, b, 2))
                if hi - lo < 0.2:
                    hi = min(b, lo + 0.2)
                fs.append(LinearFunctional.integral(str(rng.choice(weights)), (lo, hi),
                                                    quad_order=quad_order))
            else:
                fs.append(LinearFunctional(str(kind), site=float(rng.uniform(a + 0.05, b - 0.05))))
        if np.linalg.cond(gram_matrix(fs, fs, k)) < max_cond:
            return fs


def draw_data(fs, k, mean, rng):
    """Observation vector drawn from the prior pushforward N(Gm, K_GG)."""
    kgg = gram_matrix(fs, fs, k)
    vals, vecs = np.linalg.eigh(0.5 * (kgg + kgg.T))
    gm = np.array([apply(f, mean) for f in fs])
    return gm + vecs @ (np.sqrt(np.clip(vals, 0, None)) * rng.standard_normal(len(fs)))
