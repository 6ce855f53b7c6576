from fractions import Fraction

import numpy as np
import pytest

from qmark.cf import (
    ContinuantAccumulator,
    accumulate_runs,
    as_array,
    as_quotients,
    continuant,
    continuants,
    expand,
    fast_continuant,
    fibonacci_pair,
    mirror,
    partial_sums,
    split_product,
    to_fraction,
)
from qmark.errors import DomainError, InvalidInput


def test_empty_continuant_is_one():
    assert continuant(()) == 1


def test_small_continuants():
    assert continuant((1, 2, 3)) == 10
    assert continuant((2,)) == 2
    assert continuant((1, 1, 1, 1)) == 5


def test_frozen_continuants():
    # naive recursion, computed once
    assert continuant((3, 1, 4, 1, 5, 9, 2, 6)) == 16781
    assert continuant((1,) * 20) == 10946


def test_prefix_continuants():
    assert continuants((1, 2, 3)) == [1, 1, 3, 10]


def test_rejects_non_positive():
    with pytest.raises(InvalidInput):
        continuant((1, 0, 2))
    with pytest.raises(InvalidInput):
        as_quotients([-1])


def test_fibonacci_pair():
    assert fibonacci_pair(0) == (0, 1)
    assert fibonacci_pair(1) == (1, 1)
    assert fibonacci_pair(10) == (55, 89)


def test_push_ones_matches_pushing_one_at_a_time():
    slow = ContinuantAccumulator()
    fast = ContinuantAccumulator()
    for a in (3, 7):
        slow.push(a)
        fast.push(a)
    for _ in range(13):
        slow.push(1)
    fast.push_ones(13)
    assert (slow.previous, slow.value) == (fast.previous, fast.value)
    assert slow.total == fast.total and slow.length == fast.length


def test_fast_continuant_agrees():
    rng = np.random.default_rng(5)
    for _ in range(50):
        seq = np.where(rng.random(200) < 0.7, 1, rng.integers(2, 40, 200))
        assert fast_continuant(seq) == continuant(seq.tolist())


def test_accumulate_runs_all_ones_and_no_ones():
    assert int(accumulate_runs(np.ones(30, dtype=np.int32)).value) == continuant((1,) * 30)
    assert int(accumulate_runs(np.array([5, 7, 9])).value) == continuant((5, 7, 9))


def test_as_array_keeps_int_arrays():
    arr = np.ones(10, dtype=np.int32)
    assert as_array(arr) is arr or np.shares_memory(as_array(arr), arr)
    with pytest.raises(InvalidInput):
        as_array(np.array([1, 0]))


def test_to_fraction():
    assert to_fraction((1, 2, 3)) == Fraction(7, 10)
    assert to_fraction((2,)) == Fraction(1, 2)


def test_expand_both_representations():
    e = expand(Fraction(7, 10))
    assert e.canonical == (1, 2, 3)
    assert e.alternate == (1, 2, 2, 1)
    assert not e.degenerate


def test_expand_one_is_degenerate():
    e = expand(1)
    assert e.canonical == e.alternate == (1,)
    assert e.degenerate


@pytest.mark.parametrize("bad", [0, Fraction(3, 2), -1])
def test_expand_domain(bad):
    with pytest.raises(DomainError):
        expand(bad)


def test_split_identity_examples():
    assert split_product((1, 2, 3), 1) == 10
    assert split_product((1, 2, 3), 0) == 10
    assert split_product((1, 2, 3), 3) == 10
    with pytest.raises(IndexError):
        split_product((1, 2), 3)


def test_mirror():
    assert mirror((1, 2, 3)) == (3, 2, 1)
    assert continuant(mirror((4, 1, 7, 2))) == continuant((4, 1, 7, 2))


def test_partial_sums():
    assert partial_sums((1, 2, 3)) == [1, 3, 6]
