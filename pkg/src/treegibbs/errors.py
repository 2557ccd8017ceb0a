"""Exception types shared across the package."""


class RuleMismatchError(ValueError):
    """Two grid objects are bound to different quadrature rules."""


class NonPositiveError(ValueError):
    """A quantity required to be strictly positive is not."""


class KernelBuildError(RuntimeError):
    """A kernel family could not be assembled (e.g. singular moment matrix)."""
