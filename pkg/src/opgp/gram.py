"""Finite-dimensional covariance structures induced by a list of functionals.

``kgg`` is the matrix of double applications of the functionals to the
kernel, ``gm`` the functionals applied to the prior mean, and the cross
covariance at a site ``s`` is each functional applied to ``k(., s)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import SingularGram
from .functionals import apply, gram_matrix, section_matrix

JITTER_LADDER = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
# A factorization whose smallest pivot is not clearly above the jitter that was
# added (or above roundoff when no jitter was added) is rejected as rank deficient.
PIVOT_MARGIN = 10.0
PIVOT_FLOOR = 1e-13


def jittered_cholesky(mat, error=SingularGram):
    """Cholesky factor of ``mat + jitter * I`` with the smallest workable jitter.

    Jitter levels are multiples of ``trace(mat) / p`` taken from
    :data:`JITTER_LADDER`. Returns ``(L, jitter)``; raises ``error`` when every
    level fails.
    """
    mat = np.asarray(mat, dtype=float)
    p = mat.shape[0]
    if p == 0:
        return np.zeros((0, 0)), 0.0
    scale = np.trace(mat) / p
    if not np.isfinite(scale) or scale <= 0:
        raise error("Gram matrix has non-positive or non-finite trace")
    eye = np.eye(p)
    for level in JITTER_LADDER:
        jitter = level * scale
        try:
            chol = np.linalg.cholesky(mat + jitter * eye)
        except np.linalg.LinAlgError:
            continue
        if np.min(np.diag(chol)) ** 2 > max(PIVOT_MARGIN * jitter, PIVOT_FLOOR * scale):
            return chol, jitter
    raise error(
        f"Cholesky failed up to jitter {JITTER_LADDER[-1] * scale:.3g} for a "
        f"{p}x{p} Gram matrix; observations are duplicated or linearly dependent"
    )


@dataclass(frozen=True)
class GramSystem:
    functionals: tuple
    kgg: np.ndarray
    chol: np.ndarray
    jitter: float
    gm: np.ndarray

    @property
    def p(self):
        return len(self.functionals)

    @property
    def effective(self):
        """The matrix actually factorized, ``kgg + jitter * I``."""
        return self.kgg + self.jitter * np.eye(self.p)


def build_gram(k, m, fs):
    fs = tuple(fs)
    kgg = gram_matrix(fs, fs, k)
    kgg = 0.5 * (kgg + kgg.T)
    kgg[np.diag_indices_from(kgg)] += [f.noise for f in fs]
    chol, jitter = jittered_cholesky(kgg)
    gm = np.array([apply(f, m) for f in fs], dtype=float)
    return GramSystem(fs, kgg, chol, jitter, gm)


def cross_covariance(sys, k, s):
    """``K_sG``: p-vector for scalar ``s``, (len(s), p) matrix for an array."""
    out = section_matrix(sys.functionals, k, s).T
    return out[0] if np.ndim(s) == 0 else out


def inverse_sqrt(mat, floor=1e-12):
    """Symmetric inverse square root, eigenvalues floored at ``floor * max``.

    When no eigenvalue hits the floor, one Newton-Schulz step
    ``Y <- Y (3 I - A Y^2) / 2`` polishes the eigendecomposition result.
    """
    vals, vecs = np.linalg.eigh(mat)
    top = vals.max() if vals.size else 0.0
    if top <= 0 and vals.size:
        raise SingularGram("matrix is not positive definite")
    clamped = np.any(vals < floor * top)
    vals = np.maximum(vals, floor * top)
    root = (vecs / np.sqrt(vals)) @ vecs.T
    if clamped:
        return root
    root = 0.5 * root @ (3.0 * np.eye(len(vals)) - mat @ root @ root)
    return 0.5 * (root + root.T)


def representing_sequence(sys):
    """Rows ``y_i = K^{-1/2} e_i`` of the factorized Gram matrix.

    They satisfy ``<K y_i, y_j> = delta_ij`` and the Parseval identity
    ``sum_i <K y_i, x>^2 = <K x, x>``.
    """
    if sys.p == 0:
        return np.zeros((0, 0))
    return inverse_sqrt(sys.effective)
