"""Certified enclosures backed by mpmath's outward-rounded ``iv`` context.

Every transcendental quantity in the package (logarithms, square roots, the
golden ratio, ...) is carried as a :class:`CertifiedInterval`.  A comparison
is only reported as decided when the interval excludes the boundary; callers
that need a verdict use :func:`decide_sign`, which doubles the working
precision until the sign is certain or a ceiling is reached.
"""

from __future__ import annotations

import enum
from contextlib import contextmanager
from fractions import Fraction
from numbers import Rational
from typing import Callable

from mpmath import iv
from mpmath.libmp import to_rational, to_str

DEFAULT_PRECISION = 128
MAX_PRECISION = 4096


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ZERO = "zero"
    UNDECIDED = "undecided"

    @property
    def decided(self) -> bool:
        return self is not Sign.UNDECIDED


@contextmanager
def working_precision(bits: int):
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def _raw_to_fraction(raw) -> Fraction:
    p, q = to_rational(raw)
    return Fraction(int(p), int(q))


def _to_iv(value):
    """Enclose ``value`` at the current ``iv.prec``."""
    if isinstance(value, CertifiedInterval):
        return value._x
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return iv.mpf(value)
    if isinstance(value, Rational):
        return iv.mpf(int(value.numerator)) / iv.mpf(int(value.denominator))
    if isinstance(value, float):
        return iv.mpf(value)
    if isinstance(value, str):
        return _to_iv(Fraction(value))
    if hasattr(value, "__index__"):
        return iv.mpf(int(value))
    raise TypeError(f"cannot enclose {type(value).__name__}")


class CertifiedInterval:
    """A closed interval ``[lower, upper]`` guaranteed to contain a real value.

    Endpoints are binary floating-point numbers at ``precision`` bits (plus
    whatever guard bits the producer used); arithmetic rounds outward, so the
    result of any operation encloses the exact result for all operands in the
    input intervals.
    """

    __slots__ = ("_x", "precision")

    def __init__(self, x, precision: int):
        self._x = x
        self.precision = precision

    # construction -------------------------------------------------------
    @classmethod
    def exact(cls, value, precision: int = DEFAULT_PRECISION) -> "CertifiedInterval":
        with working_precision(precision):
            return cls(_to_iv(value), precision)

    @classmethod
    def hull(cls, lower, upper, precision: int = DEFAULT_PRECISION) -> "CertifiedInterval":
        with working_precision(precision):
            lo, hi = _to_iv(lower), _to_iv(upper)
            return cls(iv.mpf([lo.a, hi.b]), precision)

    # endpoints ----------------------------------------------------------
    @property
    def lower(self) -> Fraction:
        return _raw_to_fraction(self._x._mpi_[0])

    @property
    def upper(self) -> Fraction:
        return _raw_to_fraction(self._x._mpi_[1])

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return float(self._x.mid)

    def __float__(self) -> float:
        return self.mid

    # arithmetic ---------------------------------------------------------
    def _prec(self, other) -> int:
        if isinstance(other, CertifiedInterval):
            return max(self.precision, other.precision)
        return self.precision

    def _binary(self, other, op):
        prec = self._prec(other)
        with working_precision(prec):
            return CertifiedInterval(op(self._x, _to_iv(other)), prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        with working_precision(self.precision):
            return CertifiedInterval(-self._x, self.precision)

    def __pow__(self, k):
        if not isinstance(k, int):
            return self._binary(k, lambda a, b: a ** b)
        with working_precision(self.precision):
            return CertifiedInterval(self._x ** k, self.precision)

    def _unary(self, fn):
        with working_precision(self.precision):
            return CertifiedInterval(fn(self._x), self.precision)

    def sqrt(self):
        return self._unary(iv.sqrt)

    def log(self):
        return self._unary(iv.log)

    def exp(self):
        return self._unary(iv.exp)

    def abs(self):
        return self._unary(abs)

    # predicates ---------------------------------------------------------
    def sign(self) -> Sign:
        lo, hi = self._x._mpi_
        # raw mpf tuples: (sign, mantissa, exponent, bitcount); zero has mantissa 0
        lo_zero, hi_zero = lo[1] == 0 and lo[3] == 0, hi[1] == 0 and hi[3] == 0
        if lo_zero and hi_zero:
            return Sign.ZERO
        if not lo_zero and lo[0] == 0:
            return Sign.POSITIVE
        if not hi_zero and hi[0] == 1:
            return Sign.NEGATIVE
        return Sign.UNDECIDED

    def is_positive(self) -> bool:
        return self.sign() is Sign.POSITIVE

    def is_negative(self) -> bool:
        return self.sign() is Sign.NEGATIVE

    def __contains__(self, value) -> bool:
        if isinstance(value, CertifiedInterval):
            return self.lower <= value.lower and value.upper <= self.upper
        value = Fraction(value)
        return self.lower <= value <= self.upper

    def intersects(self, other) -> bool:
        if not isinstance(other, CertifiedInterval):
            return other in self
        return self.lower <= other.upper and other.lower <= self.upper

    def certainly_less(self, other) -> bool:
        """True when every point of ``self`` is below every point of ``other``."""
        return (other - self).is_positive()

    def certainly_greater(self, other) -> bool:
        return (self - other).is_positive()

    # rendering ----------------------------------------------------------
    def decimal(self, digits: int = 20) -> tuple[str, str]:
        lo, hi = self._x._mpi_
        return to_str(lo, digits), to_str(hi, digits)

    def to_json(self, digits: int = 20) -> dict:
        lo, hi = self.decimal(digits)
        return {"lower": lo, "upper": hi, "precision": self.precision}

    def __repr__(self):
        lo, hi = self.decimal(12)
        return f"CertifiedInterval([{lo}, {hi}], prec={self.precision})"


def enclose(value, precision: int = DEFAULT_PRECISION) -> CertifiedInterval:
    if isinstance(value, CertifiedInterval):
        return value
    return CertifiedInterval.exact(value, precision)


def ilog(value, precision: int = DEFAULT_PRECISION) -> CertifiedInterval:
    return enclose(value, precision).log()


def isqrt(value, precision: int = DEFAULT_PRECISION) -> CertifiedInterval:
    return enclose(value, precision).sqrt()


def log2_int(n: int, precision: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Enclosure of ``log2(n)`` for a positive (possibly huge) integer.

    The integer is split as ``m * 2**e`` with ``m`` below ``2**(precision+8)``
    so that the logarithm only ever sees a moderate number.
    """
    n = int(n)
    if n <= 0:
        raise ValueError("log2 of a non-positive integer")
    shift = max(0, n.bit_length() - precision - 8)
    with working_precision(precision):
        head = n >> shift
        if head << shift == n:
            m = iv.mpf(head)
        else:
            m = iv.mpf([head, head + 1])
        return CertifiedInterval(iv.log(m) / iv.log(2) + shift, precision)


def decide_sign(
    compute: Callable[[int], CertifiedInterval],
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> tuple[Sign, CertifiedInterval]:
    """Evaluate ``compute(bits)`` at doubling precision until its sign is certain.

    Returns the sign together with the last enclosure computed; the sign is
    ``Sign.UNDECIDED`` if ``max_precision`` was reached without a verdict.
    """
    bits = precision
    while True:
        value = compute(bits)
        sign = value.sign()
        if sign.decided or bits >= max_precision:
            return sign, value
        bits = min(2 * bits, max_precision)
