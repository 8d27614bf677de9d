"""Shared exception types."""


class ConslabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ConslabError):
    """A caller supplied arguments violating a documented precondition."""


class NumericalFailureError(ConslabError):
    """An iterative numerical routine failed to converge.

    Carries the last estimate so callers can decide whether it is usable.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SizeLimitError(ConslabError):
    """A dense computation would exceed its memory guard."""


class UnsupportedConfigError(ConslabError):
    """The requested analysis is not defined for this configuration."""
