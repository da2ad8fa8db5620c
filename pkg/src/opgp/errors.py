"""Exception types raised across the package."""


class OpGPError(Exception):
    """Base class for package errors."""


class UnsupportedDerivative(OpGPError, ValueError):
    """The kernel family cannot provide the requested derivative order."""


class MissingDerivative(OpGPError, TypeError):
    """A derivative functional was applied to a function without a derivative."""


class SingularGram(OpGPError, ArithmeticError):
    """Cholesky factorization failed at every jitter level.

    Usually means duplicated or linearly dependent observations.
    """


class RedundantBatch(SingularGram):
    """A new batch is (numerically) determined by earlier observations."""


class DimensionMismatch(OpGPError, ValueError):
    pass


class SiteOutOfGrid(OpGPError, ValueError):
    pass


class ConfigError(OpGPError, ValueError):
    pass


class ToleranceExceeded(OpGPError):
    pass
