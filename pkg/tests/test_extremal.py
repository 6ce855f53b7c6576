from fractions import Fraction

import numpy as np
import pytest

from qmark.diagnostics import block_decompose
from qmark.errors import Infeasible, InvalidInput
from qmark.extremal import (
    Verdict,
    certify_plan,
    check_T1,
    construct,
    d_sequence,
    derive_constants,
    emit_blocks,
    override_params,
    pattern_crossover,
    plan_superblock,
    verify_construction,
    verify_pattern,
    verify_phi_bound,
    verify_ratio_decay,
)

SMALL_T1 = 2**17


@pytest.fixture(scope="module")
def small():
    params = override_params("1/2", "1/2", 2, SMALL_T1)
    return construct(params, superblocks=2)


def test_derived_constants():
    p = derive_constants("1/2", "99/100")
    assert (p.M, p.P, p.N) == (690, 9, 15180)
    assert p.mode == "formula"


def test_derived_rejects_small_lambda():
    with pytest.raises(InvalidInput):
        derive_constants("1/2", "3/4")


def test_exact_integer_M():
    # eps = lam = 1/2 makes log(eps^10)/log(lam) exactly 10
    p = override_params("1/2", "1/2", 2)
    assert p.notes


def test_check_T1():
    p = override_params("1/2", "1/2", 2)
    check_T1(p, 4 * 1000)
    with pytest.raises(InvalidInput):
        check_T1(p, 4001)


def test_pattern_verdicts():
    assert verify_pattern(1, 0) is Verdict.FAIL
    assert verify_pattern(20, 4) is Verdict.PASS
    assert not Verdict.FAIL and Verdict.PASS


def test_crossover_monotone():
    values = [pattern_crossover(n) for n in (0, 4, 10, 50)]
    assert values == [11, 12, 15, 33]
    for n in (0, 4, 10):
        m = pattern_crossover(n)
        assert verify_pattern(m, n) is Verdict.PASS and verify_pattern(m - 1, n) is Verdict.FAIL


def test_d_sequence_head():
    p = override_params("1/2", "3/4", 6)
    d = d_sequence(p)
    assert len(d) == 6 and d[0].intersects(d[1])
    assert all(a.upper < b.lower for a, b in zip(d[1:], d[2:]))


def test_plan_certificate(small):
    for plan in small.plans:
        cert = certify_plan(plan, small.d, small.params)
        assert cert.passed, cert.to_json()


def test_infeasible_small_T():
    p = override_params("1/2", "1/2", 2)
    with pytest.raises(Infeasible) as info:
        plan_superblock(2**12, d_sequence(p), p)
    assert info.value.constraint.startswith("k=")


def test_emit_structure(small):
    plan = small.plans[0]
    blocks = emit_blocks(plan)
    assert blocks.size == plan.length
    pos = 0
    for b in reversed(plan.blocks):
        seg = blocks[pos:pos + b.length]
        assert seg[0] == b.m and np.count_nonzero(seg != 1) == b.repeats
        assert seg.sum() == b.repeats * (b.m + b.n)
        pos += b.length


def test_superblock_ends(small):
    ends = small.superblock_ends()
    assert ends[0] == SMALL_T1
    assert ends == [523922 - small.plans[1].length, 523922]
    assert small.prefix.size == 523922


def test_block_decompose_recovers_plan(small):
    plan = small.plans[0]
    dec = block_decompose(small.prefix, plan.T, "1/2", 2, grid=plan.grid)
    for stats, b in zip(dec.blocks, plan.blocks):
        assert stats.max_element == b.m
        assert stats.total == b.repeats * (b.m + b.n)
    assert dec.blocks[-1].max_element == 1 and dec.blocks[-1].total == plan.t_N


def test_verify_small(small):
    rep = verify_construction(small)
    assert rep.patterns_pass and rep.ratio_decay.passed
    assert all(r.bound_holds and r.target_holds for r in rep.phi_bound_full)
    # without the leading run of ones the deficiency ratio is far above the target
    assert not all(r.target_holds for r in rep.phi_bound_without_initial)
    assert rep.to_json()["passed"] is rep.passed


def test_ratio_decay_ones_fail():
    rep = verify_ratio_decay(np.ones(200, dtype=np.int32), sample_points=[10, 50, 200])
    assert not rep.non_increasing and not rep.all_below


def test_ratio_decay_large_elements():
    seq = np.array([100, 1, 1] * 20, dtype=np.int32)
    rep = verify_ratio_decay(seq)
    assert rep.passed and rep.samples[0] == 3


def test_phi_bound_directions():
    ones = np.ones(10000, dtype=np.int32)
    (r,) = verify_phi_bound(ones, [10000], Fraction(1, 2))
    assert r.bound_holds and r.target_holds and r.max_index == 1
    big = np.full(10000, 100, dtype=np.int32)
    (r,) = verify_phi_bound(big, [10000], Fraction(1, 2))
    assert r.bound_holds is False and r.max_index == 10000
    with pytest.raises(InvalidInput):
        verify_phi_bound(ones, [20000], Fraction(1, 2))
