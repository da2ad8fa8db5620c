"""Bounded linear observation functionals.

Every functional is reduced to a finite set of weighted *atoms*
``(node, weight, derivative order)``: a point evaluation is one atom, a
derivative evaluation one atom of order 1, and a weighted integral is a
Gauss-Legendre rule with the weight function folded into the quadrature
weights. Single and double application to kernels are weighted sums over
atoms.
"""
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import roots_legendre

from ._backend import core
from .errors import MissingDerivative

DEFAULT_QUAD_ORDER = 200

_TRIG = re.compile(r"^(cos|sin)(\d+)$")
_POLY = re.compile(r"^x\^?(\d+)$")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @classmethod
    def gauss_legendre(cls, n, a=-1.0, b=1.0):
        """n-point Gauss-Legendre rule on [a, b].

        Exactness on monomials of degree ``0..min(5, 2n-1)`` is checked on
        construction.
        """
        if n < 1:
            raise ValueError("quadrature order must be >= 1")
        if not b > a:
            raise ValueError("empty quadrature interval")
        x, w = roots_legendre(n)
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        rule = cls(nodes=mid + half * x, weights=half * w, order=n)
        rule._check_exactness(a, b)
        return rule

    def _check_exactness(self, a, b):
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes not strictly increasing")
        if self.nodes[0] < a or self.nodes[-1] > b:
            raise ValueError("quadrature nodes outside the support")
        for deg in range(min(5, 2 * self.order - 1) + 1):
            exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
            approx = float(np.dot(self.weights, self.nodes**deg))
            if abs(approx - exact) > 1e-12 * max(1.0, abs(exact)):
                raise ValueError(f"quadrature not exact for degree {deg}")

    def integrate(self, g):
        return float(np.dot(self.weights, g(self.nodes)))


def weight_function(name, support):
    """Resolve a named weight on ``support = (a, b)``.

    ``"one"`` is the constant 1; ``"cosJ"`` / ``"sinJ"`` are
    ``cos(pi J (x - c) / L)`` / ``sin(...)`` with c the support centre and L
    its half-width; ``"xK"`` is the monomial x^K.
    """
    if callable(name):
        return name
    a, b = support
    c, half = 0.5 * (a + b), 0.5 * (b - a)
    if name == "one":
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    m = _TRIG.match(name)
    if m:
        trig = np.cos if m.group(1) == "cos" else np.sin
        j = int(m.group(2))
        return lambda x: trig(np.pi * j * (np.asarray(x, dtype=float) - c) / half)
    m = _POLY.match(name)
    if m:
        deg = int(m.group(1))
        return lambda x: np.asarray(x, dtype=float) ** deg
    raise ValueError(f"unknown weight function {name!r}")


@dataclass(frozen=True)
class LinearFunctional:
    """A point evaluation, derivative evaluation or weighted integral.

    ``noise`` is an optional observation noise variance added to the
    functional's diagonal Gram entry (0 for exact observations).
    """

    kind: str
    site: float = 0.0
    weight: object = "one"
    support: tuple = (-1.0, 1.0)
    label: str = ""
    quad_order: int = DEFAULT_QUAD_ORDER
    noise: float = 0.0

    def __post_init__(self):
        if self.kind not in ("point", "deriv", "integral"):
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.noise < 0:
            raise ValueError("noise variance must be nonnegative")
        if self.kind == "integral":
            a, b = map(float, self.support)
            object.__setattr__(self, "support", (a, b))
            weight_function(self.weight, (a, b))  # validate name early
        else:
            object.__setattr__(self, "site", float(self.site))
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self):
        if self.kind == "point":
            return f"f({self.site:g})"
        if self.kind == "deriv":
            return f"f'({self.site:g})"
        w = self.weight if isinstance(self.weight, str) else "w"
        return f"int[{self.support[0]:g},{self.support[1]:g}] {w}*f"

    @classmethod
    def point(cls, site, **kw):
        return cls("point", site=site, **kw)

    @classmethod
    def deriv(cls, site, **kw):
        return cls("deriv", site=site, **kw)

    @classmethod
    def integral(cls, weight="one", support=(-1.0, 1.0), **kw):
        return cls("integral", weight=weight, support=tuple(support), **kw)

    @property
    def order(self):
        return 1 if self.kind == "deriv" else 0

    @cached_property
    def rule(self):
        if self.kind != "integral":
            return None
        return QuadratureRule.gauss_legendre(self.quad_order, *self.support)

    def atoms(self):
        """Return ``(nodes, weights, order)`` of the discrete representation."""
        if self.kind != "integral":
            return np.array([self.site]), np.array([1.0]), self.order
        w = weight_function(self.weight, self.support)
        return self.rule.nodes, self.rule.weights * w(self.rule.nodes), 0

    def in_domain(self, domain):
        a, b = domain
        if self.kind == "integral":
            return a <= self.support[0] and self.support[1] <= b
        return a <= self.site <= b


def apply(f, g):
    """Apply functional ``f`` to a vectorized univariate function ``g``.

    For derivative functionals ``g`` must expose ``g.derivative``.
    """
    if f.kind == "point":
        return float(np.asarray(g(np.array([f.site])))[0])
    if f.kind == "deriv":
        deriv = getattr(g, "derivative", None)
        if deriv is None:
            raise MissingDerivative(f"{f.label} needs a function with a derivative")
        return float(np.asarray(deriv(np.array([f.site])))[0])
    nodes, weights, _ = f.atoms()
    return float(np.dot(weights, g(nodes)))


def apply_to_kernel_section(f, k, s):
    """``f`` applied to ``x -> k(x, s)``, i.e. acting on the first argument."""
    return float(section_matrix([f], k, [s])[0, 0])


def apply_bilinear(f1, f2, k):
    """``f1`` on the first kernel argument, ``f2`` on the second."""
    return float(gram_matrix([f1], [f2], k)[0, 0])


def fourier_functionals(n, domain=(-1.0, 1.0), quad_order=DEFAULT_QUAD_ORDER):
    """First ``n`` real trigonometric coefficient functionals on ``domain``.

    Ordered cos1, sin1, cos2, sin2, ...; frequencies are relative to the
    domain half-width.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    j = 1
    while len(out) < n:
        for part in ("cos", "sin"):
            if len(out) < n:
                out.append(LinearFunctional.integral(
                    f"{part}{j}", tuple(domain), quad_order=quad_order,
                    label=f"fourier_{part}{j}"))
        j += 1
    return out


class AtomStack:
    """Concatenated atoms of a list of functionals, ready for the backend."""

    def __init__(self, fs):
        xs, ws, owner, ds = [], [], [], []
        for i, f in enumerate(fs):
            nodes, weights, order = f.atoms()
            xs.append(nodes)
            ws.append(weights)
            owner.append(np.full(len(nodes), i, dtype=np.int64))
            ds.append(np.full(len(nodes), order, dtype=np.int64))
        self.p = len(fs)
        cat = lambda parts, dt: (np.ascontiguousarray(np.concatenate(parts), dtype=dt)
                                 if parts else np.empty(0, dtype=dt))
        self.xs = cat(xs, np.float64)
        self.ws = cat(ws, np.float64)
        self.owner = cat(owner, np.int64)
        self.ds = cat(ds, np.int64)

    def reduce(self, k, ys, dt=0):
        """(p, len(ys)) matrix: each functional applied to ``k(., y)`` (or d/dy)."""
        ys = np.ascontiguousarray(np.atleast_1d(ys), dtype=np.float64)
        if self.p == 0:
            return np.zeros((0, ys.size))
        return core.weighted_kernel_sum(self.xs, self.ws, self.owner, self.ds, ys, dt,
                                        self.p, k.code, float(k.lengthscale),
                                        float(k.variance))


def section_matrix(fs, k, s, dt=0):
    """Matrix with entry (i, j) = ``fs[i]`` applied to ``k(., s_j)``."""
    return AtomStack(fs).reduce(k, s, dt)


def gram_matrix(fs1, fs2, k):
    """Matrix with entry (i, j) = ``fs1[i]`` x ``fs2[j]`` applied to ``k``."""
    left, right = AtomStack(fs1), AtomStack(fs2)
    out = np.zeros((left.p, right.p))
    if left.p == 0 or right.p == 0:
        return out
    for dt in (0, 1):
        sel = right.ds == dt
        if not sel.any():
            continue
        block = left.reduce(k, right.xs[sel], dt) * right.ws[sel]
        np.add.at(out.T, right.owner[sel], block.T)
    return out
