"""Minkowski's ?(x): exact dyadic values, prefix enclosures and Stern-Brocot levels."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Sequence

from qmark.cf import as_quotients, expand
from qmark.errors import DomainError, InvalidInput, ResourceLimit

DEFAULT_LEVEL_CAP = 24


@total_ordering
@dataclass(frozen=True)
class DyadicRational:
    """``numerator / 2**exponent`` in canonical form (odd numerator, or 0/2^0)."""

    numerator: int
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("exponent must be non-negative")
        n, e = self.numerator, self.exponent
        if n == 0:
            e = 0
        else:
            # strip common factors of two
            tz = min((n & -n).bit_length() - 1, e)
            n, e = n >> tz, e - tz
        object.__setattr__(self, "numerator", n)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_fraction(cls, value) -> "DyadicRational":
        value = Fraction(value)
        d = value.denominator
        if d & (d - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, d.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __lt__(self, other):
        if isinstance(other, DyadicRational):
            e = max(self.exponent, other.exponent)
            return self.numerator << (e - self.exponent) < other.numerator << (e - other.exponent)
        return self.to_fraction() < Fraction(other)

    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return self.numerator == other.numerator and self.exponent == other.exponent
        try:
            return self.to_fraction() == Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __str__(self):
        return f"{self.numerator}/2^{self.exponent}"

    def decimal(self, digits: int = 30) -> str:
        """Decimal rendering rounded down to ``digits`` places (an approximation)."""
        scaled = (self.numerator * 10**digits) >> self.exponent
        sign = "-" if scaled < 0 else ""
        whole, frac = divmod(abs(scaled), 10**digits)
        return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".") if digits else f"{sign}{whole}"


@dataclass(frozen=True)
class Enclosure:
    lower: DyadicRational
    upper: DyadicRational

    def __contains__(self, value) -> bool:
        v = value.to_fraction() if isinstance(value, DyadicRational) else Fraction(value)
        return self.lower.to_fraction() <= v <= self.upper.to_fraction()

    @property
    def width(self) -> Fraction:
        return self.upper.to_fraction() - self.lower.to_fraction()


def _denjoy_numerator(seq) -> tuple[int, int]:
    # partial sum N_k / 2**(S_k - 1); N_{k+1} = N_k * 2**a_{k+1} -+ 1
    num, total = 0, 0
    for k, a in enumerate(seq):
        total += a
        num = (num << a) + (1 if k % 2 == 0 else -1)
    return num, total


def question_mark(seq: Sequence[int]) -> DyadicRational:
    """Exact ``?([0; a1..an]) = sum_k (-1)^(k+1) / 2^(a1+...+ak - 1)``."""
    seq = as_quotients(seq)
    if not seq:
        raise InvalidInput("question_mark needs a non-empty prefix")
    num, total = _denjoy_numerator(seq)
    return DyadicRational(num, total - 1)


def question_mark_of(x) -> DyadicRational:
    """?(x) for a rational ``0 < x <= 1`` (``x = 0`` maps to 0)."""
    x = Fraction(x)
    if x == 0:
        return DyadicRational(0, 0)
    return question_mark(expand(x).canonical)


def question_mark_enclosure(prefix: Sequence[int]) -> Enclosure:
    """Interval containing ?(y) for every y whose expansion starts with ``prefix``.

    The alternating tail after n terms has magnitude at most ``2**-S(prefix)``
    (reached when the next quotient is 1), so ?(y) lies between the partial
    sum and the partial sum moved by that amount toward the next term's sign.
    """
    prefix = as_quotients(prefix)
    if not prefix:
        raise InvalidInput("question_mark_enclosure needs a non-empty prefix")
    partial = question_mark(prefix)
    total = sum(prefix)
    step = DyadicRational(1, total)
    p, s = partial.to_fraction(), step.to_fraction()
    # the next term has sign (-1)^(n+2): negative after an odd number of terms
    other = p - s if len(prefix) % 2 == 1 else p + s
    lo, hi = min(p, other), max(p, other)
    return Enclosure(DyadicRational.from_fraction(lo), DyadicRational.from_fraction(hi))


@dataclass(frozen=True)
class SternBrocotLevel:
    n: int
    values: tuple[Fraction, ...]

    def __len__(self):
        return len(self.values)


def _level_values(total: int) -> list[tuple[int, int]]:
    """Distinct values ``(p, q)`` of ``[0; a1..ak]`` over compositions of ``total``.

    Builds ``[0; a, rest] = 1 / (a + [0; rest])`` from the memoised sets for
    smaller totals.
    """
    memo: dict[int, set[tuple[int, int]]] = {}
    for s in range(1, total + 1):
        vals = {(1, s)}
        for a in range(1, s):
            for p, q in memo[s - a]:
                # 1 / (a + p/q) = q / (a q + p), already in lowest terms
                vals.add((q, a * q + p))
        memo[s] = vals
    return sorted(memo[total], key=lambda pq: Fraction(*pq))


def stern_brocot_level(n: int, cap: int = DEFAULT_LEVEL_CAP) -> SternBrocotLevel:
    """The level ``B_n``: values of all prefixes whose quotients sum to ``n + 1``."""
    if n < 1:
        raise InvalidInput("level index must be >= 1")
    if n > cap:
        raise ResourceLimit(f"level {n} exceeds the enumeration cap {cap}")
    values = tuple(Fraction(p, q) for p, q in _level_values(n + 1))
    return SternBrocotLevel(n, values)


def empirical_distribution(n: int, x, cap: int = DEFAULT_LEVEL_CAP) -> Fraction:
    """``|{v in B_n : v <= x}| / |B_n|``."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise DomainError(f"empirical_distribution needs 0 <= x <= 1, got {x}")
    level = stern_brocot_level(n, cap)
    return Fraction(bisect.bisect_right(level.values, x), len(level.values))
