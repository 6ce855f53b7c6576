from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from qmark import cf, minkowski
from qmark.bounds import check_continuant_lower_bound
from qmark.suite import elimination_problems
from qmark.transforms import eliminate_small, unit_shift_compare

quotients = st.lists(st.integers(1, 1000), min_size=1, max_size=30)
unit_interval = st.fractions(min_value=0, max_value=1, max_denominator=10**6)


@given(quotients, st.data())
def test_split(seq, data):
    cut = data.draw(st.integers(0, len(seq)))
    assert cf.split_product(seq, cut) == cf.continuant(seq)


@given(quotients)
def test_mirror(seq):
    assert cf.continuant(seq) == cf.continuant(cf.mirror(seq))


@given(quotients)
def test_fraction_roundtrip(seq):
    x = cf.to_fraction(seq)
    exp = cf.expand(x)
    assert cf.to_fraction(exp.canonical) == x == cf.to_fraction(exp.alternate)


@given(unit_interval, unit_interval)
def test_question_mark_monotone(x, y):
    a, b = minkowski.question_mark_of(x), minkowski.question_mark_of(y)
    assert (x < y) == (a < b) and (x == y) == (a == b)


@given(unit_interval)
def test_question_mark_symmetry(x):
    # ?(1 - x) = 1 - ?(x)
    assert minkowski.question_mark_of(1 - x).to_fraction() == 1 - minkowski.question_mark_of(x).to_fraction()


@given(st.lists(st.one_of(st.just(1), st.integers(12, 200)), min_size=1, max_size=60))
def test_lower_bound(seq):
    assert check_continuant_lower_bound(seq).decided


small_seq = st.lists(st.integers(1, 50), max_size=8)


@given(small_seq, small_seq, st.booleans(), small_seq, st.integers(1, 50), st.integers(0, 50))
def test_unit_shift(A, half, odd, C, m, extra):
    B = half + list(reversed(half[: len(half) - odd])) if half else []
    left, right = unit_shift_compare(A, B, C, m, m + extra)
    assert left <= right


@settings(max_examples=50)
@given(st.lists(st.one_of(st.just(1), st.integers(2, 11), st.integers(12, 60)), min_size=1, max_size=400))
def test_elimination(seq):
    out, trace = eliminate_small(seq, 12)
    assert elimination_problems(seq, out, trace) is None
