"""Nystrom estimate of the integral operator spectrum and a summability check.

Sample paths of a GP lie in the power RKHS of exponent theta when
``sum_i lambda_i^(1 - theta)`` converges. On a truncated spectrum this can
only be assessed heuristically; the verdict here is advisory.
"""
from dataclasses import dataclass

import numpy as np

CLAMP = 1e-12
GEOMETRIC_RATIO = 0.9


@dataclass(frozen=True)
class MercerSpectrum:
    eigenvalues: np.ndarray
    grid_size: int
    measure: str
    domain: tuple


@dataclass(frozen=True)
class PowerCheck:
    theta: float
    terms: np.ndarray
    partial_sums: np.ndarray
    tail_ratio: float
    verdict: str


def mercer_spectrum(k, n=256, domain=(-1.0, 1.0)):
    """Eigenvalues of ``h * K`` on the midpoint grid of ``n`` cells.

    Approximates the spectrum of ``f -> int k(., s) f(s) ds`` under the
    uniform Lebesgue measure on ``domain``. Values below ``1e-12 * max``
    (including roundoff negatives) are clamped to zero.
    """
    if n < 16:
        raise ValueError("n must be >= 16")
    a, b = domain
    h = (b - a) / n
    grid = a + h * (np.arange(n) + 0.5)
    vals = np.linalg.eigvalsh(h * k.matrix(grid, grid))[::-1]
    vals = np.where(vals < CLAMP * vals[0], 0.0, vals)
    return MercerSpectrum(vals, n, "uniform", (float(a), float(b)))


def power_rkhs_check(mercer, theta):
    """Partial sums of ``lambda_i^(1 - theta)`` and a tail-decay verdict.

    The tail is the last quartile of the resolved (nonzero) eigenvalues;
    the verdict is ``"converging"`` when the median successive-term ratio
    there is at most 0.9, ``"inconclusive"`` otherwise.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    lam = mercer.eigenvalues
    expo = 1.0 - theta
    terms = np.ones_like(lam) if expo == 0 else np.where(lam > 0, lam, 0.0) ** expo
    sums = np.cumsum(terms)
    resolved = terms[terms > 0]
    tail = resolved[3 * resolved.size // 4:]
    if tail.size < 2:
        ratio = 0.0
    else:
        ratio = float(np.median(tail[1:] / tail[:-1]))
    verdict = "converging" if ratio <= GEOMETRIC_RATIO else "inconclusive"
    return PowerCheck(theta, terms, sums, ratio, verdict)
