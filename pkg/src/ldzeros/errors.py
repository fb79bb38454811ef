"""Exception taxonomy shared across modules.

The CLI maps these onto exit codes: usage errors -> 1, indeterminate numerics
under --strict -> 2, resource errors -> 3.
"""


class DomainError(ValueError):
    """Argument outside an operation's stated domain."""


class ResourceError(RuntimeError):
    """A computation exceeds its configured budget (term counts, expansion size)."""


class AccuracyError(RuntimeError):
    """An iteration or quadrature failed to reach its accuracy target."""


class ConditioningError(RuntimeError):
    """A value cannot be produced to useful accuracy at this point."""


class NearZeroError(RuntimeError):
    """A denominator is below its conditioning floor (signals proximity to a zero)."""

    def __init__(self, message: str, magnitude: float):
        super().__init__(message)
        self.magnitude = magnitude


class IndeterminateError(RuntimeError):
    """A certificate could not be produced; the result is neither true nor false."""


class ContourProximityError(IndeterminateError):
    """A contour passes too close to a zero for its count to be certified."""


class TruncationError(RuntimeError):
    """A truncation bound exceeds the requested tolerance."""

    def __init__(self, message: str, suggested: int | None = None):
        super().__init__(message)
        self.suggested = suggested


class CacheError(RuntimeError):
    """Stored artifact disagrees with its recorded key or hash."""
