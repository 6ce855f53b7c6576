import math
from fractions import Fraction

import pytest

from qmark.errors import InvalidInput
from qmark.intervals import enclose
from qmark.minimax import (
    MinimaxInstance,
    bounds_check,
    brute_force_minmax,
    max_phi_lower_bounds,
    modified_sequence,
    phi_prime_values,
    phi_tilde_values,
    phi_values,
    solve_equalizing,
)

Q = Fraction(1, 4)


def test_phi_examples():
    assert [v.mid for v in phi_values([1, 1], Q, 1)] == [Fraction(11, 8), 1]
    assert Fraction(19, 8) in phi_values([2, 1], Q, 1)[0]
    assert Fraction(3) in phi_values([1], Q, 3)[0]


def test_phi_prime_examples():
    vals = phi_prime_values([1, 1], Q, 1)
    assert Fraction(11, 16) in vals[0] and Fraction(1, 4) in vals[1]
    assert Fraction(1, 2) in phi_prime_values([1], Q, 1)[0]


def test_substitution_identity():
    # d_j = sqrt(lam)^j c_j turns phi'_i into phitilde'_i
    c = [Fraction(3, 5), Fraction(7, 4), Fraction(2)]
    lam = Fraction(9, 16)  # sqrt = 3/4
    d = [Fraction(3, 4) ** j * cj for j, cj in enumerate(c, start=1)]
    for a, b in zip(phi_prime_values(c, lam, 2), phi_tilde_values(d, lam, 2)):
        assert a.intersects(b)


def test_non_positive_rejected():
    with pytest.raises(InvalidInput):
        phi_values([1, 0], Q, 1)
    with pytest.raises(InvalidInput):
        MinimaxInstance(0, Q)
    with pytest.raises(InvalidInput):
        MinimaxInstance(2, 1)


def test_closed_form_two_terms():
    sol = solve_equalizing(MinimaxInstance(2, Q, 1))
    assert sol.certified
    assert abs(float(sol.y_min.mid) - math.sqrt(3) / 8) < 1e-15
    assert (sol.d[1] - enclose(3, 256).sqrt() / 8).abs().upper < Fraction(1, 10**30)


def test_single_term():
    sol = solve_equalizing(MinimaxInstance(1, Q, 1))
    assert sol.y_min.mid == 0


def test_quadratic_consistency():
    inst = MinimaxInstance(40, Fraction(9, 10), 1)
    sol = solve_equalizing(inst)
    lam = Fraction(9, 10)
    for k in range(1, 40):
        lhs = sol.d[k] - sol.d[k - 1]
        rhs = (1 - lam) * enclose(lam) ** (k + 1) / sol.d[k]
        assert lhs.intersects(rhs)


def test_monotone_d():
    sol = solve_equalizing(MinimaxInstance(30, Fraction(1, 2), 2))
    assert all(a.upper <= b.lower for a, b in zip(sol.d, sol.d[1:]))


def test_near_sqrt2_for_lambda_close_to_one():
    sol = solve_equalizing(MinimaxInstance(2000, Fraction(99, 100), 1))
    assert abs(float(sol.y_min.mid) - math.sqrt(2)) / math.sqrt(2) <= 0.05


def test_bounds_small():
    assert bounds_check(MinimaxInstance(2, Q, 1)).passed
    rep = bounds_check(MinimaxInstance(1, Q, 1))
    assert rep.passed and rep.checked_upper == 1 and rep.checked_difference == 0


def test_oracle_sandwich():
    for N, lam in [(2, Q), (3, Fraction(1, 2))]:
        sol = solve_equalizing(MinimaxInstance(N, lam, 1))
        orc = brute_force_minmax(N, lam, 1.0)
        assert abs(orc.value - float(sol.y_min.mid)) <= orc.slack


def test_oracle_limits():
    with pytest.raises(InvalidInput):
        brute_force_minmax(5, Q)


def test_modified_sequence_head():
    d = modified_sequence(MinimaxInstance(5, Fraction(3, 4), 1))
    expected = math.sqrt(0.25 * 0.75)
    assert abs(float(d[0].mid) - expected) < 1e-15 and d[0].intersects(d[1])
    assert d[2].lower > d[1].upper


def test_max_phi_report():
    sol = solve_equalizing(MinimaxInstance(2000, Fraction(99, 100), 1))
    c = sol.c_sequence()[1:]
    rep = max_phi_lower_bounds([enclose(Fraction(1, 10**6))] + c, Fraction(99, 100), 1)
    assert rep["N"] == 2000
    assert abs(float(Fraction(rep["max_phi_prime"]["value"]["lower"])) - math.sqrt(2)) < 0.1
    single = max_phi_lower_bounds([2], Q, 1)
    assert Fraction(single["max_phi"]["value"]["lower"]) == 2
