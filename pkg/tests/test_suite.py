import pytest

from qmark.errors import InvalidInput
from qmark.suite import Property, default_properties, run_property, shrink, verify_all


def _false_sum(case):
    # deliberately false: "every sequence sums to less than 50"
    return None if sum(case["seq"]) < 50 else f"sum {sum(case['seq'])}"


FALSE = Property("demo.false", lambda r: {"seq": tuple(r.randint(1, 40) for _ in range(r.randint(1, 20)))},
                 _false_sum)


def test_false_property_is_caught_and_shrunk():
    res = run_property(FALSE, seed=3, trials=50)
    assert not res.passed and res.failures > 0
    seq = res.counterexample["seq"]
    # greedy shrinking drives the sum down to the boundary
    assert 50 <= sum(seq) < 90 and len(seq) <= 3
    assert res.shrink_steps > 0


def test_shrink_reaches_local_minimum():
    case, msg, steps = shrink(FALSE, {"seq": (40, 40, 40)}, "sum 120")
    assert sum(case["seq"]) >= 50 and steps >= 1
    assert msg == f"sum {sum(case['seq'])}"


def test_registry_names_unique():
    names = [p.name for p in default_properties()]
    assert len(names) == len(set(names)) == 14


def test_all_properties_pass():
    rep = verify_all(seed=1, trials=60)
    assert rep.passed, [r.to_json() for r in rep.results if not r.passed]


def test_deterministic():
    a = verify_all(seed=9, trials=20, only=["cf.split_identity", "minkowski.monotone"]).to_json()
    b = verify_all(seed=9, trials=20, only=["minkowski.monotone", "cf.split_identity"]).to_json()
    assert a == b


def test_seed_independence_per_property():
    # a property's cases do not depend on which other properties run
    full = {r.name: r.to_json() for r in verify_all(seed=4, trials=10).results}
    solo = verify_all(seed=4, trials=10, only=["bounds.min_product"]).results[0]
    assert full["bounds.min_product"] == solo.to_json()


def test_bad_arguments():
    with pytest.raises(InvalidInput):
        verify_all(trials=0)
    with pytest.raises(InvalidInput):
        verify_all(only=["no.such.property"])
