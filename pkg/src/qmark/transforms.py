"""Continuant-decreasing rewrites of a prefix.

:func:`unit_shift_compare` evaluates both sides of
``<A, 1, B, p + m - 1, C> <= <A, m, B, p, C>`` for a symmetric ``B``.
:func:`eliminate_small` applies that rewrite repeatedly to remove every
element ``v`` with ``1 < v < threshold``: the element becomes ``1`` and the
next element greater than ``1`` grows by ``v - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from qmark.cf import PartialQuotients, as_quotients, continuant
from qmark.errors import InvalidInput, LemmaViolation


def unit_shift_compare(A: Sequence[int], B: Sequence[int], C: Sequence[int], m: int, p: int) -> tuple[int, int]:
    """Return ``(<A,1,B,p+m-1,C>, <A,m,B,p,C>)``; raises if the first exceeds the second."""
    A, B, C = as_quotients(A), as_quotients(B), as_quotients(C)
    if B != B[::-1]:
        raise InvalidInput("B must be symmetric")
    if m < 1:
        raise InvalidInput("m must be >= 1")
    if p < m:
        raise InvalidInput(f"need p >= m, got p={p}, m={m}")
    left = continuant(A + (1,) + B + (p + m - 1,) + C)
    right = continuant(A + (m,) + B + (p,) + C)
    if left > right:
        raise LemmaViolation(f"<A,1,B,p+m-1,C> = {left} > {right} = <A,m,B,p,C>")
    return left, right


@dataclass
class PassTrace:
    """One elimination pass for the value ``value`` (positions are 1-based)."""

    value: int
    replacements: list[tuple[int, int]] = field(default_factory=list)
    unmatched: int | None = None  # an s with no later element > 1

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "replacements": [list(r) for r in self.replacements],
            "unmatched": self.unmatched,
        }


@dataclass
class EliminationTrace:
    threshold: int
    passes: list[PassTrace] = field(default_factory=list)

    @property
    def unmatched(self) -> list[tuple[int, int]]:
        """``(value, position)`` of every s left in place."""
        return [(p.value, p.unmatched) for p in self.passes if p.unmatched is not None]

    @property
    def has_unmatched_tail(self) -> bool:
        return any(p.unmatched is not None for p in self.passes)

    @property
    def active_passes(self) -> list[PassTrace]:
        return [p for p in self.passes if p.replacements or p.unmatched is not None]

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "passes": [p.to_json() for p in self.active_passes],
            "unmatched": [list(u) for u in self.unmatched],
        }


def eliminate_small(prefix: Sequence[int], threshold: int = 12) -> tuple[PartialQuotients, EliminationTrace]:
    """Remove every element in ``2 .. threshold - 1``.

    Passes run for ``v = 2, 3, ..`` in increasing order.  Within a pass the
    scan is left to right: ``s`` is the next index with ``a_s = v`` after the
    previous ``t``, and ``t`` the first later index with ``a_t > 1``.  Then
    ``a_s`` becomes 1 and ``a_t`` grows by ``v - 1``.  An ``s`` without a
    ``t`` inside the prefix is left unchanged and reported; at most one can
    occur per pass since it is the last element greater than 1.
    """
    if threshold < 2:
        raise InvalidInput("threshold must be >= 2")
    seq = list(as_quotients(prefix))
    trace = EliminationTrace(threshold)
    # positions holding an element > 1, kept in increasing order
    big = [i for i, a in enumerate(seq) if a > 1]
    for v in range(2, threshold):
        record = PassTrace(v)
        kept = []
        j = 0
        while j < len(big):
            s = big[j]
            if seq[s] != v:
                kept.append(s)
                j += 1
                continue
            if j + 1 == len(big):
                record.unmatched = s + 1
                kept.append(s)
                break
            t = big[j + 1]
            seq[s] = 1
            seq[t] += v - 1
            record.replacements.append((s + 1, t + 1))
            # s is now 1; the next s must come after t
            kept.append(t)
            j += 2
        big = kept
        trace.passes.append(record)
    return tuple(seq), trace
