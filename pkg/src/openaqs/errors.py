"""Exception and warning types shared across the package."""


class OpenAQSError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OpenAQSError, ValueError):
    """Invalid parameter or configuration input."""


class DomainError(OpenAQSError, ValueError):
    """Argument outside the domain of an operation (e.g. time out of range)."""


class NumericalError(OpenAQSError, RuntimeError):
    """A numerical procedure failed to converge or produced invalid values."""


class PhysicalityWarning(UserWarning):
    """The Bloch vector left the unit ball beyond the allowed tolerance."""
