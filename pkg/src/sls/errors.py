"""Exception types shared across the package."""


class SLSError(Exception):
    """Base class for all package-specific errors."""


class SingularGram(SLSError):
    """The design matrix is (numerically) rank deficient: a pivot of the
    Cholesky factorization of X'X fell below the relative threshold."""


class NoRootInRange(SLSError):
    """The empirical scale equation has no sign change in (0, c_max]; the
    growth condition required for a root is violated."""


class NonFiniteScale(SLSError):
    """The empirical scale function evaluated to NaN."""


class DegenerateDirection(SLSError):
    """A direction is degenerate: zero ground-truth row, zero quadratic
    form, or vanishing mean link derivative."""


class InsufficientPoints(SLSError):
    """Too few distinct sweep values to fit a convergence slope."""


class ConfigError(SLSError):
    """A run configuration is malformed. Carries the offending field path."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class DataFormatError(SLSError):
    """A dataset container file is malformed or truncated."""
