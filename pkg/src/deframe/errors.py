"""Exception types shared across the package."""


class DeframeError(Exception):
    """Base class for all errors raised by deframe."""


class DimensionError(DeframeError, ValueError):
    """Array shapes are empty, mismatched, or too small for the operation."""


class DomainError(DeframeError, ValueError):
    """A scalar parameter lies outside its mathematical domain."""


class NumericError(DeframeError, ArithmeticError):
    """A computation produced non-finite values or broke a numeric invariant."""

    def __init__(self, message, step=None, iteration=None):
        super().__init__(message)
        self.step = step
        self.iteration = iteration


class ConfigError(DeframeError, ValueError):
    """An experiment manifest or solver configuration is invalid."""


class ImageIOError(DeframeError, OSError):
    """An image or sidecar file is missing, unreadable, or in an unsupported format."""
