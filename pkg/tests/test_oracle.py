from fractions import Fraction

import numpy as np
import pytest

from naive import naive_norm, phi_table
from odometer_oe import BaseSequence, Constant, Log, Power, build_table, fuzz_plans, verify_level, verify_plan
from odometer_oe.errors import CapExceeded, DepthError
from odometer_oe.oracle import TableBuilder, exact_norm, plan_hash, random_sequence

REF = BaseSequence([1, 1, 2, 3, 8, 27])
OMEGAS = [Power(Fraction(1, 2)), Log(), Constant(1.0), Power(1)]


def test_build_table_examples():
    assert build_table(REF, 2, "psi").table == (0, 1, 4, 2, 3, 5)
    assert build_table(REF, 2, "psi_inv").table == (0, 1, 3, 4, 2, 5)
    assert build_table(REF, 2, "phi").table == (0, 1, 0, 1, 2, 2, 0, 1)
    assert build_table(REF, 2, "mod_kn_psi_inv").table == (0, 1, 0, 1, 2, 2)
    with pytest.raises(CapExceeded):
        build_table(REF, 4, "psi", cap=100)
    with pytest.raises(DepthError):
        build_table(REF, 4, "phi")
    with pytest.raises(ValueError):
        build_table(REF, 2, "nope")


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_numpy_tables_match_pointwise_tables(n):
    tb = TableBuilder(REF)
    for map_id in ("psi", "psi_inv", "mod_kn_psi_inv") + (("phi",) if n < 4 else ()):
        assert tuple(tb.table(n, map_id).tolist()) == build_table(REF, n, map_id).table


def test_verify_level_reference():
    rep = verify_level(REF, 2, OMEGAS)
    assert rep.passed
    defect = rep.find(2, "diagram_defect")
    assert (defect.value, defect.bound) == ("1/6", "2/3")
    assert defect.detail.startswith("set={5};") and "red_measure=1/3" in defect.detail
    comp = rep.find(2, "composition_defect")
    assert (comp.value, comp.bound) == ("1/8", "17/12")
    fib = rep.find(2, "fiber_max")
    assert (fib.value, fib.bound) == ("3/8", "7/12")
    assert rep.find(2, "boundary_cardinality").passed


def test_verify_plan_reference_is_green():
    rep = verify_plan(REF, OMEGAS)
    assert rep.passed and not rep.skipped
    levels = {c.level for c in rep.checks if c.name == "bijection"}
    assert levels == {1, 2, 3, 4}


def test_verify_plan_reports_sequence_violation():
    rep = verify_plan(BaseSequence([1, 1, 2, 3, 4, 27]), OMEGAS)
    assert not rep.passed
    assert any(c.name == "k_{n+1} > k_{n-1}k_n" for c in rep.failures)


def test_cap_skips_levels():
    rep = verify_plan(REF, OMEGAS, cap=50)
    assert rep.passed
    assert rep.skipped and "level 4" in rep.skipped[0]


def test_mutated_table_is_caught():
    tb = TableBuilder(REF)
    psi = tb.psi(3).copy()
    psi[[3, 4]] = psi[[4, 3]]
    tb._psi[3] = psi
    rep = verify_level(REF, 3, OMEGAS, builder=tb)
    assert not rep.find(3, "table_vs_recursion").passed
    assert rep.find(3, "bijection").passed


def test_exact_norm_matches_naive():
    ks = REF.ks
    for n in (1, 2, 3):
        table = np.array(phi_table(ks, n))
        for w in OMEGAS:
            assert exact_norm(table, w).value == pytest.approx(naive_norm(phi_table(ks, n), w.eval), rel=1e-12)


def test_random_sequences_are_valid():
    import random

    rng = random.Random(7)
    for _ in range(200):
        seq = random_sequence(rng, 5, 5000)
        assert seq.violations() == []
        assert seq.depth >= 2


def test_fuzz_small():
    assert fuzz_plans(0, 0).reports == []
    summary = fuzz_plans(3, 10)
    assert summary.passed and summary.n_checks > 0
    again = fuzz_plans(3, 10)
    assert [r.plan_hash for r in again.reports] == [r.plan_hash for r in summary.reports]


def test_report_serialization():
    rep = verify_level(REF, 2, [Power(Fraction(1, 2))])
    obj = rep.to_json()
    assert obj["plan_hash"] == plan_hash(REF)
    lines = rep.to_csv().strip().splitlines()
    assert lines[0].startswith("plan_hash,level,check")
    assert len(lines) == len(rep.checks) + 1
