import random

import pytest

from qmark.cf import continuant
from qmark.errors import InvalidInput
from qmark.suite import elimination_problems
from qmark.transforms import eliminate_small, unit_shift_compare


def test_unit_shift_examples():
    assert unit_shift_compare((), (), (), 2, 3) == (5, 7)
    assert unit_shift_compare((), (1,), (), 2, 2) == (7, 8)
    left, right = unit_shift_compare((3, 1), (2, 5, 2), (4,), 1, 1)
    assert left == right


def test_unit_shift_validation():
    with pytest.raises(InvalidInput):
        unit_shift_compare((), (1, 2), (), 2, 2)
    with pytest.raises(InvalidInput):
        unit_shift_compare((), (), (), 3, 2)
    with pytest.raises(InvalidInput):
        unit_shift_compare((), (), (), 0, 2)


def test_unit_shift_random():
    rng = random.Random(11)
    for _ in range(500):
        half = tuple(rng.randint(1, 9) for _ in range(rng.randint(0, 3)))
        B = half + half[::-1]
        m = rng.randint(1, 9)
        A = tuple(rng.randint(1, 9) for _ in range(rng.randint(0, 4)))
        C = tuple(rng.randint(1, 9) for _ in range(rng.randint(0, 4)))
        left, right = unit_shift_compare(A, B, C, m, m + rng.randint(0, 9))
        assert left <= right


def test_eliminate_examples():
    out, trace = eliminate_small((2, 1, 1, 3))
    assert out == (1, 1, 1, 4)
    assert trace.unmatched == [(4, 4)]
    out, trace = eliminate_small((2, 1, 5))
    assert out == (1, 1, 6)
    assert trace.unmatched == [(6, 3)]
    out, trace = eliminate_small((1, 1, 1, 1))
    assert out == (1, 1, 1, 1) and not trace.active_passes


def test_eliminate_replacement_positions():
    out, trace = eliminate_small((3, 1, 20, 2, 15))
    # v=2: s=4 -> t=5; v=3: s=1 -> t=3
    assert out == (1, 1, 22, 1, 16)
    assert trace.passes[0].replacements == [(4, 5)]
    assert trace.passes[1].replacements == [(1, 3)]
    assert not trace.has_unmatched_tail


def test_eliminate_threshold():
    out, _ = eliminate_small((2, 3), threshold=3)
    assert out == (1, 4)
    with pytest.raises(InvalidInput):
        eliminate_small((2,), threshold=1)


def test_eliminate_invariants_random():
    rng = random.Random(3)
    for _ in range(200):
        seq = tuple(rng.choice((1, 1, 1, 2, 3, 5, 7, 11, 12, 30)) for _ in range(rng.randint(1, 60)))
        out, trace = eliminate_small(seq)
        assert elimination_problems(seq, out, trace) is None
        assert continuant(out) <= continuant(seq)
