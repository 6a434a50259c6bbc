"""Exception types shared across the package."""


class UdwChainError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(UdwChainError):
    """Cholesky pivot k is non-positive or drowned in rounding noise.

    This is the working signal that the moment matrix needs more digits;
    it is never silently regularized.
    """

    def __init__(self, k, detail=""):
        self.k = k
        super().__init__(f"pivot {k} not positive definite{': ' + detail if detail else ''}")


class SingularDiagonal(UdwChainError):
    """Triangular inverse hit a zero diagonal entry at index k."""

    def __init__(self, k):
        self.k = k
        super().__init__(f"zero diagonal entry at index {k}")


class DomainError(UdwChainError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class NonConvergence(UdwChainError):
    """An adaptive quadrature could not reach the requested tolerance."""


class QuadratureNonConvergence(NonConvergence):
    """The perturbative double-time quadrature did not converge."""


class PrecisionExhausted(UdwChainError):
    """Too few significant digits survive a high-precision pipeline stage.

    Raised by the thermal moment -> Cholesky route and by the density
    reconstruction digit-loss audit.  The fix is to rerun with more digits.
    """


class WrongDetectorKind(UdwChainError, ValueError):
    """An engine was fed parameters for the other detector type."""


class GridMismatch(UdwChainError, ValueError):
    """Two density profiles do not share a usable common grid."""


class OutOfRange(UdwChainError, ValueError):
    """A mapped coordinate leaves the support of the source profile."""


class ConfigError(UdwChainError, ValueError):
    """Scenario configuration failed validation; message names the field."""


class BondOverflowWarning(UserWarning):
    """chi_max bound an SVD truncation; the run continues but is flagged."""
