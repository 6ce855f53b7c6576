from fractions import Fraction

import pytest

from qmark.cf import expand
from qmark.errors import DomainError, InvalidInput, ResourceLimit
from qmark.minkowski import (
    DyadicRational,
    empirical_distribution,
    question_mark,
    question_mark_enclosure,
    question_mark_of,
    stern_brocot_level,
)

# values from an independent Stern-Brocot walk (?(mediant) = mean of the endpoints)
FROZEN = {
    Fraction(7, 10): Fraction(25, 32),
    Fraction(1, 3): Fraction(1, 4),
    Fraction(2, 5): Fraction(3, 8),
    Fraction(13, 21): Fraction(43, 64),
    Fraction(71, 200): Fraction(4289, 16384),
    Fraction(1, 7): Fraction(1, 64),
}


@pytest.mark.parametrize("x,expected", sorted(FROZEN.items()))
def test_frozen_values(x, expected):
    assert question_mark_of(x).to_fraction() == expected


def test_both_expansions_of_seven_tenths():
    assert question_mark((1, 2, 3)) == DyadicRational(25, 5)
    assert question_mark((1, 2, 2, 1)) == DyadicRational(25, 5)


def test_single_quotient():
    assert question_mark((2,)) == DyadicRational(1, 1)
    assert question_mark_of(1) == DyadicRational(1, 0)
    assert question_mark_of(0) == DyadicRational(0, 0)


def test_dyadic_canonical_form():
    d = DyadicRational(12, 5)
    assert (d.numerator, d.exponent) == (3, 3)
    assert DyadicRational(0, 9).exponent == 0
    assert DyadicRational.from_fraction(Fraction(3, 8)) == d
    with pytest.raises(ValueError):
        DyadicRational.from_fraction(Fraction(1, 3))


def test_dyadic_ordering_and_decimal():
    assert DyadicRational(1, 2) < DyadicRational(1, 1)
    assert DyadicRational(25, 5).decimal(5) == "0.78125"
    assert str(DyadicRational(25, 5)) == "25/2^5"


def test_enclosures():
    e = question_mark_enclosure((1,))
    assert (e.lower.to_fraction(), e.upper.to_fraction()) == (Fraction(1, 2), Fraction(1))
    e = question_mark_enclosure((1, 1))
    assert (e.lower.to_fraction(), e.upper.to_fraction()) == (Fraction(1, 2), Fraction(3, 4))


def test_enclosure_contains_continuations_and_shrinks():
    prefix = (2, 3, 1)
    enc = question_mark_enclosure(prefix)
    for tail in [(1,), (5,), (1, 1, 1), (7, 2)]:
        assert question_mark(prefix + tail) in enc
    assert question_mark_enclosure(prefix + (1,)).width <= enc.width / 2


def test_empty_prefix_rejected():
    with pytest.raises(InvalidInput):
        question_mark(())


def test_levels():
    assert stern_brocot_level(1).values == (Fraction(1, 2),)
    assert stern_brocot_level(2).values == (Fraction(1, 3), Fraction(2, 3))
    assert len(stern_brocot_level(4)) == 8
    with pytest.raises(ResourceLimit):
        stern_brocot_level(30)
    with pytest.raises(InvalidInput):
        stern_brocot_level(0)


def test_level_values_have_the_right_quotient_sum():
    for v in stern_brocot_level(6).values:
        e = expand(v)
        assert sum(e.canonical) == 7


def test_empirical_distribution():
    assert empirical_distribution(3, Fraction(1, 2)) == Fraction(1, 2)
    assert empirical_distribution(2, Fraction(1, 3)) == Fraction(1, 2)
    assert empirical_distribution(4, 1) == 1
    with pytest.raises(DomainError):
        empirical_distribution(3, 2)
