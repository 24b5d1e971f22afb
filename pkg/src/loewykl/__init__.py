"""Loewy layer tables of parabolically induced modules over Frobenius kernels.

The package has two independent halves.  The combinatorial half computes
layer tables from periodic Kazhdan-Lusztig polynomials, built by exact
translation-stabilization of ordinary affine Kazhdan-Lusztig polynomials.
The oracle half realizes the same modules explicitly over F_p for sl2 and
sl3 and reads their socle series off by linear algebra.  Agreement between
the two halves is the package's correctness argument.
"""

from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    LoewyKLError,
    NotHighestWeight,
    NotRegular,
    PredictionMismatch,
    StabilizationFailed,
    UnsupportedAlgebra,
    UnsupportedType,
    WindowTooSmall,
)
from .rootsys import ParabolicDatum, RootDatum, build_root_datum, parabolic_datum

__all__ = [
    "DimensionMismatch",
    "InternalInconsistency",
    "LoewyKLError",
    "NotHighestWeight",
    "NotRegular",
    "ParabolicDatum",
    "PredictionMismatch",
    "RootDatum",
    "StabilizationFailed",
    "UnsupportedAlgebra",
    "UnsupportedType",
    "WindowTooSmall",
    "build_root_datum",
    "parabolic_datum",
]
