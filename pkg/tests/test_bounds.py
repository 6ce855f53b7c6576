from fractions import Fraction

import pytest

from qmark.bounds import (
    MinProductInstance,
    check_continuant_lower_bound,
    continuant_lower_bound,
    grid,
    min_product_bound,
    min_product_bound_exact,
    min_product_oracle,
    sweep_min_product,
)
from qmark.errors import InvalidInput, ResourceLimit


def test_lower_bound_value():
    # (1/2) phi^3 (12/4) for (12, 1, 1)
    b = continuant_lower_bound((12, 1, 1))
    phi = (1 + 5**0.5) / 2
    assert abs(float(b.mid) - 0.5 * phi**3 * 3) < 1e-12


def test_check_lower_bound():
    res = check_continuant_lower_bound((12, 1, 13))
    assert res.decided and res.continuant == 181
    assert res.slack > 1
    assert check_continuant_lower_bound((1,) * 40).decided


def test_empty_rejected():
    with pytest.raises(InvalidInput):
        continuant_lower_bound(())


def test_instance_validation():
    with pytest.raises(InvalidInput):
        MinProductInstance(10, 2, 4)
    with pytest.raises(InvalidInput):
        MinProductInstance(10, 4, 4)
    with pytest.raises(InvalidInput):
        MinProductInstance(3, 3, 4)


@pytest.mark.parametrize("s,alpha,beta,expected", [(8, 3, 4, 16), (12, 3, 4, 64), (9, 3, 3.5, 3.5**2), (4, 3, 4, 4)])
def test_bound_examples(s, alpha, beta, expected):
    inst = MinProductInstance(s, alpha, Fraction(beta))
    assert min_product_bound_exact(inst) == Fraction(expected)
    assert Fraction(expected) in min_product_bound(inst)


def test_oracle_examples():
    res = min_product_oracle(MinProductInstance(8, 3, 4), Fraction(1, 4))
    assert res.minimum == 16 and res.holds
    res = min_product_oracle(MinProductInstance(9, 3, 4), Fraction(1, 4))
    assert res.minimum == 27 and res.argmin == (3, 3, 3)
    assert res.to_json()["holds"]


def test_oracle_infeasible_and_cap():
    res = min_product_oracle(MinProductInstance(Fraction(41, 10), 3, 4), Fraction(1, 4))
    assert not res.feasible and res.holds
    with pytest.raises(ResourceLimit):
        min_product_oracle(MinProductInstance(200, 3, 8), Fraction(1, 64), cap=1000)


def test_grid_helper():
    assert grid(3, 4, Fraction(1, 2)) == [3, Fraction(7, 2), 4]
    assert grid(3, 4, Fraction(1, 2), include_lo=False) == [Fraction(7, 2), 4]


def test_small_sweep():
    rep = sweep_min_product([3, Fraction(7, 2)], 5, 16, Fraction(1, 2))
    assert rep.passed and rep.feasible > 0 and rep.min_ratio >= 1
