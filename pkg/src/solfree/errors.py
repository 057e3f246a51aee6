"""Exception types shared across the package."""


class SolfreeError(ValueError):
    """Domain error: inputs violate a documented precondition."""


class ResolutionCapError(SolfreeError):
    """A grid computation would exceed the configured resolution cap."""
