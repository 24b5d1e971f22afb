"""Exception types shared across the package.

Mathematical-contract failures are distinct from usage errors: the former
mean a verified identity failed to hold (a bug, or an input outside the
supported regime), the latter mean the caller handed us something malformed.
"""

__all__ = [
    "LoewyKLError",
    "UnsupportedType",
    "UnsupportedAlgebra",
    "NotRegular",
    "NotHighestWeight",
    "StabilizationFailed",
    "WindowTooSmall",
    "InternalInconsistency",
    "PredictionMismatch",
    "DimensionMismatch",
]


class LoewyKLError(Exception):
    """Base class for all package errors."""


class UnsupportedType(LoewyKLError):
    """Root-datum label outside the supported list."""


class UnsupportedAlgebra(LoewyKLError):
    """Oracle asked for a Lie algebra it does not model."""


class NotRegular(LoewyKLError):
    """Weight lies on an affine wall (p-singular input)."""


class NotHighestWeight(LoewyKLError):
    """Module has no one-dimensional top weight space killed by raising operators."""


class StabilizationFailed(LoewyKLError):
    """Translation-stabilized polynomial values kept changing past the depth cap."""


class WindowTooSmall(LoewyKLError):
    """A nonzero entry reached the boundary of the truncation window after all retries."""


class InternalInconsistency(LoewyKLError):
    """A computed quantity violates a structural constraint (negative coefficient,
    exponent out of range, half power where an integer power is forced)."""


class PredictionMismatch(LoewyKLError):
    """A closed-form prediction (Loewy length, factor placement) disagrees with the table."""


class DimensionMismatch(LoewyKLError):
    """The two sides of the dimension identity disagree."""
