"""Continued-fraction prefixes and their continuants.

A prefix ``(a1, ..., at)`` of positive integers stands for the rational
``[0; a1, ..., at]``.  Its continuant ``<a1, ..., at>`` obeys the three-term
recurrence ``<A, a> = a <A> + <A without its last element>`` with ``< > = 1``;
all values are exact Python integers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import gmpy2
import numpy as np

from qmark.errors import DomainError, InvalidInput

PartialQuotients = tuple[int, ...]


def as_quotients(seq: Iterable[int]) -> PartialQuotients:
    """Validate ``seq`` and return it as a tuple of Python ints."""
    out = tuple(int(a) for a in seq)
    for i, a in enumerate(out):
        if a < 1:
            raise InvalidInput(f"partial quotient #{i + 1} is {a}; all elements must be >= 1")
    return out


class ContinuantAccumulator:
    """Streams ``(<A_{t-1}>, <A_t>)`` as partial quotients are appended.

    The pair starts at ``(0, 1)`` so that the first push yields ``<a1> = a1``.
    Any integer type supporting ``*`` and ``+`` works (e.g. ``gmpy2.mpz``).
    """

    __slots__ = ("previous", "value", "length", "total")

    def __init__(self, previous=0, value=1):
        self.previous = previous
        self.value = value
        self.length = 0
        self.total = 0

    def push(self, a: int) -> None:
        self.previous, self.value = self.value, a * self.value + self.previous
        self.length += 1
        self.total += a

    def extend(self, seq: Iterable[int]) -> None:
        for a in seq:
            self.push(a)

    def push_ones(self, n: int, fib_pair=None) -> None:
        """Append ``n`` ones in one step.

        Appending ``n`` ones maps ``(p, q)`` to ``(F_{n-1} p + F_n q, F_n p + F_{n+1} q)``.
        ``fib_pair`` may supply ``(F_n, F_{n+1})`` when the caller caches them.
        """
        if n <= 0:
            return
        fn, fn1 = fib_pair if fib_pair is not None else fibonacci_pair(n)
        fnm1 = fn1 - fn
        p, q = self.previous, self.value
        self.previous, self.value = fnm1 * p + fn * q, fn * p + fn1 * q
        self.length += n
        self.total += n

    def copy(self) -> "ContinuantAccumulator":
        other = ContinuantAccumulator(self.previous, self.value)
        other.length, other.total = self.length, self.total
        return other


def fibonacci_pair(n: int) -> tuple[int, int]:
    """Return ``(F_n, F_{n+1})`` with ``F_0 = 0, F_1 = 1`` by fast doubling."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a, b = 0, 1
    for bit in bin(n)[2:]:
        c = a * (2 * b - a)
        d = a * a + b * b
        a, b = (d, c + d) if bit == "1" else (c, d)
    return a, b


def continuant(seq: Iterable[int]) -> int:
    """Exact continuant of a (possibly empty) prefix, in linear time."""
    acc = ContinuantAccumulator()
    for i, a in enumerate(seq):
        a = int(a)
        if a < 1:
            raise InvalidInput(f"partial quotient #{i + 1} is {a}; all elements must be >= 1")
        acc.push(a)
    return acc.value


def continuants(seq: Iterable[int]) -> list[int]:
    """All prefix continuants ``[<A_0>, <A_1>, ..., <A_t>]`` with ``<A_0> = 1``."""
    acc = ContinuantAccumulator()
    out = [1]
    for a in as_quotients(seq):
        acc.push(a)
        out.append(acc.value)
    return out


def to_fraction(seq: Sequence[int]) -> Fraction:
    """Value of ``[0; a1, ..., at]`` computed as ``<a2..at> / <a1..at>``."""
    seq = as_quotients(seq)
    if not seq:
        raise InvalidInput("to_fraction needs a non-empty prefix")
    return Fraction(continuant(seq[1:]), continuant(seq))


class Expansion(NamedTuple):
    """The two continued-fraction representations of a rational in (0, 1]."""

    canonical: PartialQuotients
    alternate: PartialQuotients

    @property
    def degenerate(self) -> bool:
        # only x = 1 has a single representation, (1,)
        return self.canonical == self.alternate


def expand(x) -> Expansion:
    """Both expansions ``[0; a1..an]`` (``an >= 2``) and ``[0; a1..an - 1, 1]``.

    ``x = 1`` is the degenerate endpoint and maps to ``((1,), (1,))``.
    """
    x = Fraction(x)
    if not 0 < x <= 1:
        raise DomainError(f"expand needs 0 < x <= 1, got {x}")
    if x == 1:
        return Expansion((1,), (1,))
    quotients = []
    p, q = x.numerator, x.denominator
    while p:
        a, r = divmod(q, p)
        quotients.append(a)
        q, p = p, r
    canonical = tuple(quotients)
    alternate = canonical[:-1] + (canonical[-1] - 1, 1)
    return Expansion(canonical, alternate)


def split_product(seq: Sequence[int], cut: int) -> int:
    """Evaluate ``<a1..a_cut><a_{cut+1}..a_s> + <a1..a_{cut-1}><a_{cut+2}..a_s>``.

    A continuant of a "length -1" range counts as 0, which covers the
    ``cut = 0`` and ``cut = s`` edge cases.
    """
    seq = as_quotients(seq)
    if not 0 <= cut <= len(seq):
        raise IndexError(f"cut {cut} outside 0..{len(seq)}")
    left = continuant(seq[:cut])
    right = continuant(seq[cut:])
    if cut == 0 or cut == len(seq):
        return left * right
    return left * right + continuant(seq[: cut - 1]) * continuant(seq[cut + 1 :])


def mirror(seq: Sequence[int]) -> PartialQuotients:
    return tuple(reversed(seq))


def partial_sums(seq: Iterable[int]) -> list[int]:
    """``[S(A_1), ..., S(A_t)]``."""
    out, total = [], 0
    for a in seq:
        total += a
        out.append(total)
    return out


def as_array(seq) -> np.ndarray:
    """``seq`` as a validated one-dimensional integer array (no copy if it already is one)."""
    arr = np.asarray(seq)
    if arr.dtype.kind not in "iu":
        arr = arr.astype(np.int64)
    arr = arr.reshape(-1)
    if arr.size and int(arr.min()) < 1:
        bad = int(np.flatnonzero(arr < 1)[0])
        raise InvalidInput(f"partial quotient #{bad + 1} is {int(arr[bad])}; all elements must be >= 1")
    return arr


def accumulate_runs(seq, acc: ContinuantAccumulator | None = None) -> ContinuantAccumulator:
    """Feed ``seq`` into an accumulator, jumping over runs of ones.

    Long prefixes that are mostly ones (the superblock construction) cost
    one big-integer step per element greater than 1 instead of one per
    element.  Values are ``gmpy2.mpz``.
    """
    arr = as_array(seq)
    if acc is None:
        acc = ContinuantAccumulator(gmpy2.mpz(0), gmpy2.mpz(1))
    start = 0
    for pos in np.flatnonzero(arr != 1).tolist():
        if pos > start:
            acc.push_ones(pos - start, _fib_pair_mpz(pos - start))
        acc.push(int(arr[pos]))
        start = pos + 1
    if arr.size > start:
        acc.push_ones(arr.size - start, _fib_pair_mpz(arr.size - start))
    return acc


def _fib_pair_mpz(n: int):
    fn, fnm1 = gmpy2.fib2(n)
    return fn, fn + fnm1


def fast_continuant(seq) -> int:
    """Same value as :func:`continuant`, computed by :func:`accumulate_runs`."""
    return int(accumulate_runs(seq).value)
