"""Exception types raised across the package."""


class GelSwellError(Exception):
    """Base class for all package errors."""


class DomainError(GelSwellError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NotHyperbolic(GelSwellError):
    """The state violates u**2 + G'(1/psi) < 0."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class NoRoot(GelSwellError):
    """A sign-change scan found nothing to refine."""


class QuadratureError(GelSwellError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class IncompatibleData(GelSwellError):
    """Initial data violates the boundary compatibility conditions."""

    def __init__(self, message, line):
        super().__init__(message)
        self.line = line


class NonFinite(GelSwellError):
    pass


class NonMonotone(GelSwellError):
    pass


class BoundBlowup(GelSwellError):
    """The a-priori bound's denominator is no longer positive."""


class InterpolationOutOfRange(GelSwellError):
    pass


class ConfigError(GelSwellError, ValueError):
    """Malformed configuration document."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
