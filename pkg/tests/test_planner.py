import json
from fractions import Fraction

import jsonschema
import pytest

from odometer_oe import (
    BaseSequence,
    Constant,
    Log,
    NoFillerPrime,
    NotSublinear,
    Power,
    PowerLog,
    SequencePlan,
    SupernaturalNumber,
    check_plan,
    plan,
    series_bound,
    valuation,
)
from odometer_oe.planner import schedule, tail_budget, term_II, term_III
from odometer_oe.reporting import load_schema

TWO = SupernaturalNumber.parse("2^inf")
THREE = SupernaturalNumber.parse("3^inf")


def test_schedule_sums_below_a_third():
    delta = Fraction(1, 10)
    total = sum(schedule(delta, n) for n in range(60))
    assert total < delta / 3
    assert tail_budget(delta, 5) == sum(schedule(delta, n) for n in range(5, 200)) + delta / (3 * 2**201)


def test_terms_on_reference():
    seq = BaseSequence([1, 1, 2, 3, 8, 27])
    # (k_{n-1} k_n / k_{n+1}) w(k_n) at n = 1: (2/3) * 2
    assert term_II(seq, Power(1), 1) == pytest.approx(4 / 3)
    # (2 / k_n) w(k_{n-1} k_n) at n = 3: (2/8) * 24
    assert term_III(seq, Power(1), 3) == pytest.approx(6.0)


def test_huge_delta_gives_minimal_growth():
    p = plan(TWO, THREE, Power("1/2"), 10**6, 3)
    assert p.seq.ks == (1, 1, 2, 3, 8)
    assert check_plan(p).passed


def test_certified_plan(certified_plan):
    p = certified_plan
    cert = check_plan(p)
    assert cert.passed, cert.failures
    assert cert.sum_II < 1 / 30 and cert.sum_III < 1 / 30
    for n in range(1, p.depth + 1):
        k = p.seq.k(n)
        q = 2 if n % 2 else 3
        assert q ** valuation(k, q) == k
    assert series_bound(p) < 1.1


def test_prefix_closure(certified_plan):
    short = plan(TWO, THREE, Power("1/2"), "1/10", 4)
    assert short.seq.ks == certified_plan.seq.ks[:6]
    assert certified_plan.truncate(4).seq == short.seq
    assert check_plan(certified_plan.truncate(4)).passed


def test_other_families_certify():
    for omega in (Log(), PowerLog(Fraction(1, 2), Fraction(1)), Constant(1.0), Power(Fraction(1, 3))):
        p = plan(TWO, THREE, omega, "1/10", 4)
        assert check_plan(p).passed, omega.describe()


def test_mixed_targets():
    x = SupernaturalNumber.parse("2^inf*5^inf")
    y = SupernaturalNumber.parse("3^inf*7^1")
    p = plan(x, y, Power("1/2"), "1/2", 4)
    assert check_plan(p).passed
    assert valuation(p.seq.k(4), 7) <= 1


def test_failure_modes():
    with pytest.raises(NotSublinear):
        plan(TWO, THREE, Power(1), "1/10", 4)
    with pytest.raises(NoFillerPrime):
        plan(SupernaturalNumber({2: 2}), THREE, Power("1/2"), "1/10", 6)
    with pytest.raises(ValueError):
        plan(TWO, THREE, Power("1/2"), "1/10", 1)
    with pytest.raises(ValueError):
        plan(TWO, THREE, Power("1/2"), 0, 3)


def test_check_plan_catches_tampering(certified_plan):
    ks = list(certified_plan.seq.ks)
    ks[4] //= 2  # k_3 loses a factor and growth at n=2 breaks
    bad = SequencePlan(BaseSequence(ks), TWO, THREE, Power("1/2"), Fraction(1, 10))
    cert = check_plan(bad)
    assert not cert.passed
    names = {i.condition for i in cert.failures}
    assert "k_{n+1} > k_{n-1}k_n" in names or any(n.startswith("II") for n in names)

    wrong_prime = SequencePlan(BaseSequence([1, 1, 2, 3, 8, 27 * 5]), TWO, THREE, Power("1/2"), Fraction(10**6))
    assert any(i.condition.startswith("I:") for i in check_plan(wrong_prime).failures)

    lied = SequencePlan(certified_plan.seq, TWO, THREE, Power("1/2"), Fraction(1, 10),
                        [0.0] * 6, list(certified_plan.terms_III))
    assert "stored terms match recomputation" in {i.condition for i in check_plan(lied).failures}


def test_json_round_trip_and_schema(certified_plan):
    obj = json.loads(json.dumps(certified_plan.to_json()))
    jsonschema.validate(obj, load_schema("plan"))
    back = SequencePlan.from_json(obj)
    assert back.seq == certified_plan.seq
    assert back.delta == Fraction(1, 10)
    assert back.omega == certified_plan.omega
    assert back.terms_II == certified_plan.terms_II
    jsonschema.validate(json.loads(json.dumps(check_plan(back).to_json())), load_schema("certificate"))


def test_deep_plan_certifies(deep_plan):
    assert len(str(deep_plan.seq.k(8))) > 500
    assert check_plan(deep_plan).passed
    assert deep_plan.seq.ks[:8] == plan(TWO, THREE, Power("1/2"), "1/10", 6).seq.ks
