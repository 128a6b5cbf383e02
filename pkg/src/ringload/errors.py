"""Exception types shared across the package."""


class RingLoadError(Exception):
    """Base class for all library errors."""


class EmptySystemError(RingLoadError):
    """An operation needed at least one bin (or one point) and found none."""


class AlreadyPresentError(RingLoadError):
    """Insert of a ball, bin, or ring point that already exists."""


class NotFoundError(RingLoadError):
    """Delete or lookup of a ball, bin, or ring point that does not exist."""


class InvalidOperationError(RingLoadError):
    """Operation precondition violated (e.g. removing the last bin while balls remain)."""


class InfeasibleError(RingLoadError):
    """Total capacity is too small to place every ball."""
