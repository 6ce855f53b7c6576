"""Exact comparisons of big integers against powers of sqrt(2)."""

from __future__ import annotations

import enum
from fractions import Fraction


class Comparison(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"

    @classmethod
    def of(cls, left, right) -> "Comparison":
        if left < right:
            return cls.LESS
        if left > right:
            return cls.GREATER
        return cls.EQUAL


def compare_scaled_squares(x, ex: int, y, ey: int) -> Comparison:
    """Compare ``x**2 * 2**ex`` with ``y**2 * 2**ey`` for non-negative integers.

    Bit lengths settle the comparison whenever the magnitudes differ by more
    than a couple of bits; only near-ties pay for the two squarings.
    """
    if x < 0 or y < 0:
        raise ValueError("operands must be non-negative")
    if x == 0 or y == 0:
        return Comparison.of(x, y)
    # x**2 * 2**ex lies in [2**(2(bx-1)+ex), 2**(2bx+ex))
    bx, by = x.bit_length(), y.bit_length()
    lo_x, hi_x = 2 * (bx - 1) + ex, 2 * bx + ex
    lo_y, hi_y = 2 * (by - 1) + ey, 2 * by + ey
    if hi_x <= lo_y:
        return Comparison.LESS
    if hi_y <= lo_x:
        return Comparison.GREATER
    shift = min(ex, ey)
    ex, ey = ex - shift, ey - shift
    return Comparison.of((x * x) << ex, (y * y) << ey)


def compare_ratio(q, total: int, c: Fraction) -> Comparison:
    """Compare ``q / sqrt(2)**total`` with the positive rational ``c``.

    Equivalent to comparing ``q**2 * den**2`` with ``num**2 * 2**total``.
    """
    c = Fraction(c)
    if c <= 0:
        raise ValueError("threshold must be positive")
    return compare_scaled_squares(q * c.denominator, 0, c.numerator, total)
