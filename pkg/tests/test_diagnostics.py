from fractions import Fraction

import numpy as np
import pytest

from qmark.constants import constants
from qmark.diagnostics import (
    block_decompose,
    block_grid,
    check_phi_gt_3w,
    check_phi_positive,
    derivative_ratio_compare,
    increment_bounds,
    increment_bounds_exact,
    phi1_series,
)
from qmark.errors import InvalidInput
from qmark.exact import Comparison


def test_phi1_values():
    s = phi1_series((1, 2, 3))
    assert abs(float(s.phi1[2].mid) - (6 - 3 * 1.3884838272612346)) < 1e-12
    assert abs(float(phi1_series((12,)).phi1[0].mid) - 10.6115161727387654) < 1e-12
    assert s.sums == [1, 3, 6]
    assert s.w == [0, 1, 2]


def test_ratio_class():
    # <1,1> / sqrt2^2 = 1
    s = phi1_series((1, 1), ratio_threshold=1)
    assert s.ratio_class[1] is Comparison.EQUAL
    assert derivative_ratio_compare((1, 1), 1) is Comparison.EQUAL
    assert derivative_ratio_compare((1, 1), Fraction(1, 2)) is Comparison.GREATER
    assert derivative_ratio_compare((20,), Fraction(1, 2)) is Comparison.LESS
    with pytest.raises(InvalidInput):
        derivative_ratio_compare((1,), 0)


def test_increment_bounds_examples():
    assert increment_bounds_exact((1, 1), 2) == (Fraction(1, 32), Fraction(4))
    assert increment_bounds_exact((1, 2, 3), 3) == (Fraction(15, 512), Fraction(25, 4))
    assert increment_bounds_exact((2,), 1) == (Fraction(1, 32), Fraction(4))
    lo, hi = increment_bounds((1, 2, 3), 3)
    assert Fraction(15, 512) in lo and Fraction(25, 4) in hi
    with pytest.raises(IndexError):
        increment_bounds_exact((1, 2), 3)


def test_phi_positive():
    assert check_phi_positive(phi1_series((12,) * 10)).passed
    rep = check_phi_positive(phi1_series((1,) * 6))
    assert rep.failures == [1, 2, 3, 4, 5, 6]
    assert check_phi_positive(phi1_series((1, 1, 12)), start=3).passed


def test_phi_gt_3w():
    series = phi1_series((12,) + (1,) * 10)
    rep = check_phi_gt_3w(series, start=11)
    assert rep.passed
    assert check_phi_gt_3w(phi1_series((13, 13))).passed
    assert check_phi_gt_3w(phi1_series((1, 1, 1))).failures == [1, 2, 3]
    with pytest.raises(InvalidInput):
        check_phi_gt_3w(phi1_series((1, 5)))


def test_block_grid():
    assert block_grid(14, Fraction(1, 2), 1) == [14, 7]
    assert block_grid(16, Fraction(1, 2), 3) == [16, 8, 4, 2]
    with pytest.raises(InvalidInput):
        block_grid(14, Fraction(1, 2), 2)


def test_block_decompose_all_ones():
    bd = block_decompose(np.ones(16, dtype=np.int64), 16, Fraction(1, 2), 3)
    assert [b.length for b in bd.blocks] == [8, 4, 2, 2]
    assert all(b.max_element == 1 for b in bd.blocks)
    # rightmost maximum of an all-ones block is its last index
    assert bd.block(1).max_index == 16
    assert len(bd.sumfkneg) == 3 and len(bd.mainlow) == 3


def test_block_decompose_sums_and_signs():
    prefix = (30,) + (1,) * 7 + (40,) + (1,) * 7
    bd = block_decompose(prefix, 16, Fraction(1, 2), 1)
    assert bd.block(1).total == 47 and bd.block(2).total == 37
    assert bd.block(1).max_index == 9
    # each block with a big element has <B> < sqrt2^S, so the product test is LESS
    assert bd.sumfkneg == [Comparison.LESS]
    kappa1 = float(constants().kappa1)
    assert abs(float(bd.block(1).phi1.mid) - (47 - 8 * kappa1)) < 1e-9


def test_block_decompose_explicit_grid():
    prefix = np.arange(1, 21) % 3 + 1
    bd = block_decompose(prefix, 20, Fraction(1, 2), 2, grid=[20, 9, 4])
    assert [(b.start, b.end) for b in bd.blocks] == [(10, 20), (5, 9), (1, 4)]
    with pytest.raises(InvalidInput):
        block_decompose(prefix, 20, Fraction(1, 2), 2, grid=[20, 9, 9])


def test_block_decompose_threshold_and_epsilon():
    with pytest.raises(InvalidInput):
        block_decompose((1, 5, 1, 1), 4, Fraction(1, 2), 1, element_threshold=12)
    bd = block_decompose((1, 12, 1, 1), 4, Fraction(1, 2), 1, epsilon=Fraction(1, 2))
    assert len(bd.deviations) == 2
    assert "blocks" in bd.to_json()
