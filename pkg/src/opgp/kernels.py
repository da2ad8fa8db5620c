"""Stationary covariance kernels and prior mean functions.

Kernels carry closed-form partial derivatives up to order (1, 1), which is
what derivative-type observations need. All evaluation goes through the
backend selected in :mod:`opgp._backend`.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ._backend import core
from .errors import UnsupportedDerivative

FAMILIES = {"matern52": 0, "squared_exponential": 1}


@dataclass(frozen=True)
class Kernel:
    """Stationary kernel on the real line.

    Matern 5/2 uses ``k(r) = var * (1 + sqrt(5) r / l + 5 r^2 / (3 l^2)) * exp(-sqrt(5) r / l)``;
    the squared exponential uses ``var * exp(-r^2 / (2 l^2))``.
    """

    family: str = "matern52"
    lengthscale: float = 1.0
    variance: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.lengthscale > 0:
            raise ValueError("lengthscale must be positive")
        if not self.variance > 0:
            raise ValueError("variance must be positive")

    @property
    def code(self):
        return FAMILIES[self.family]

    def matrix(self, x, y, order=(0, 0)):
        """Matrix of ``d^order[0]_s d^order[1]_t k(s, t)`` for s in x, t in y."""
        ds, dt = _check_order(order)
        x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
        y = np.ascontiguousarray(np.atleast_1d(y), dtype=np.float64)
        return core.kernel_matrix(x, y, self.code, float(self.lengthscale),
                                  float(self.variance), ds, dt)

    def diag(self, x):
        return np.full(np.shape(np.atleast_1d(x)), float(self.variance))

    def __call__(self, s, t):
        return kernel_eval(self, s, t)


def _check_order(order):
    ds, dt = (int(o) for o in order)
    if ds not in (0, 1) or dt not in (0, 1):
        raise UnsupportedDerivative(f"derivative order {order} exceeds (1, 1)")
    return ds, dt


def _check_finite(*vals):
    for v in vals:
        if math.isnan(v):
            raise ValueError("NaN kernel argument")


def kernel_eval(k, s, t):
    s, t = float(s), float(t)
    _check_finite(s, t)
    return float(k.matrix([s], [t])[0, 0])


def kernel_deriv(k, s, t, order):
    """Closed-form ``d^i_s d^j_t k(s, t)`` for ``order = (i, j)``, i, j in {0, 1}."""
    s, t = float(s), float(t)
    _check_finite(s, t)
    return float(k.matrix([s], [t], order)[0, 0])


@dataclass(frozen=True)
class MeanFunction:
    """Prior mean: zero, a constant, or a cubic spline through tabulated values.

    Vectorized evaluation via ``__call__``; ``derivative`` gives the first
    derivative, needed when a derivative functional is applied to the mean.
    """

    kind: str = "zero"
    value: float = 0.0
    grid: tuple = ()
    values: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "tabulated"):
            raise ValueError(f"unknown mean kind {self.kind!r}")
        if self.kind == "tabulated":
            grid = np.asarray(self.grid, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if grid.ndim != 1 or grid.shape != vals.shape or grid.size < 2:
                raise ValueError("tabulated mean needs matching 1-D grid and values")
            if np.any(np.diff(grid) <= 0):
                raise ValueError("tabulated mean grid must be strictly increasing")
            if not np.all(np.isfinite(vals)):
                raise ValueError("tabulated mean values must be finite")
            object.__setattr__(self, "_spline", CubicSpline(grid, vals))

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, c):
        return cls("constant", value=float(c))

    @classmethod
    def tabulated(cls, grid, values):
        return cls("tabulated", grid=tuple(map(float, grid)), values=tuple(map(float, values)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.value)
        return self._spline(x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            return self._spline(x, 1)
        return np.zeros_like(x)
