"""Gaussian process inference under linear operator observations.

Batch conditioning and sequential assimilation of point, derivative and
weighted-integral observations, with a grid-discretization oracle.
"""
from ._backend import BACKEND
from .errors import (
    ConfigError,
    DimensionMismatch,
    MissingDerivative,
    RedundantBatch,
    SingularGram,
    SiteOutOfGrid,
    ToleranceExceeded,
    UnsupportedDerivative,
)
from .functionals import (
    LinearFunctional,
    QuadratureRule,
    apply,
    apply_bilinear,
    apply_to_kernel_section,
    fourier_functionals,
)
from .gram import GramSystem, build_gram, cross_covariance, representing_sequence
from .kernels import Kernel, MeanFunction, kernel_deriv, kernel_eval
from .posterior import (
    PosteriorGP,
    condition,
    fiber_check,
    posterior_cov,
    posterior_mean,
    posterior_var,
    posterior_via_representing,
)
from .rkhs_diag import MercerSpectrum, PowerCheck, mercer_spectrum, power_rkhs_check
from .sequential import (
    PosteriorState,
    assimilate,
    expanded_two_stage_moments,
    seq_cov,
    seq_mean,
    seq_var,
    timing_report,
)

__version__ = "0.1.0"
