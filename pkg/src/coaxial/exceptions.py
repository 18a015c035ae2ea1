"""Exception types raised across the package."""


class CoaxialError(Exception):
    """Base class for all package errors."""


class DimensionError(CoaxialError, ValueError):
    pass


class DomainError(CoaxialError, ValueError):
    """Input outside the domain of an operation (non-SPD, complex roots, ...)."""


class EigenConvergenceError(CoaxialError, RuntimeError):
    pass


class NotCommutingError(CoaxialError, ValueError):
    pass


class NotCoaxialError(CoaxialError, ValueError):
    """A coefficient representation was requested for a non-coaxial pair."""


class DegenerateCoefficientsError(CoaxialError, ValueError):
    """Closed-form semi-inversion is undefined (zero denominator); use the direct solve."""


class UnsupportedModelError(CoaxialError, TypeError):
    pass


class ConvergenceError(CoaxialError, RuntimeError):
    """Newton iteration failed to converge."""
