"""Exact-rational helpers shared by the cloud model and rate calculators."""

from fractions import Fraction


def as_fraction(x) -> Fraction:
    """Convert a number to an exact Fraction.

    Floats are taken at their shortest decimal representation, so a parameter
    written as ``0.05`` means exactly 1/20 rather than the nearest binary
    double.  This keeps threshold comparisons in the cloud model and the rate
    formulas free of float rounding.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a valid quantity")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"cannot represent {x!r} as a fraction")
        return Fraction(repr(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")
