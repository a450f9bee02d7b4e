"""Exception types shared across the workbench."""


class SoftmaxKitError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(SoftmaxKitError, ValueError):
    """An argument violates a documented precondition (bad shape, range, flag)."""


class NumericDomainError(SoftmaxKitError, ValueError):
    """A numeric input is outside the domain a kernel is specified for.

    Raised for non-finite logits, non-positive normalization sums, and
    approximate-exp inputs outside the supported range.
    """


class ResourceError(SoftmaxKitError, MemoryError):
    """Buffer allocation failed."""
