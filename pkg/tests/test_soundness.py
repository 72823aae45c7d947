"""Exhaustive concrete executions over small inputs versus the analysis."""

import pytest

from concrete import Interpreter, executions, soundness_violations
from helpers import HAVE_Z3, LOOP_FREE, analyze
from solinterval.domain import Interval


@pytest.mark.parametrize("case", LOOP_FREE, ids=lambda c: f"{c[1]}.{c[2]}")
def test_loop_free_sound_builtin(case):
    assert soundness_violations(analyze(*case[:3])) == []


@pytest.mark.skipif(not HAVE_Z3, reason="z3 binary not installed")
@pytest.mark.parametrize("case", LOOP_FREE, ids=lambda c: f"{c[1]}.{c[2]}")
def test_loop_free_sound_with_external(case):
    assert soundness_violations(analyze(*case[:3], external=True)) == []


def test_oracle_detects_a_planted_bug():
    a = analyze("branches.sol", "Branches", "classify")
    broken = dict(a.entries)
    broken[3] = broken[3].replace(vals={**broken[3].vals, "a": Interval(0, 3)})
    original = a.solve.entries
    a.solve.entries = broken
    try:
        assert soundness_violations(a, limit=1)
    finally:
        a.solve.entries = original


def test_interpreter_reverts_like_solidity():
    a = analyze("bid_contract.sol", "BidContract", "bid")
    fn = a.lowered.function
    runs = list(executions(a.contract, fn))
    # msg.value stays below 8, so the require rejects every enumerated input
    assert runs and all(t.reverted for _, t in runs)
    revert_stmt = a.cfg.nodes[5].stmt
    assert all(s is not revert_stmt for _, t in runs for s, _ in t.visits)


def test_interpreter_division_by_zero_reverts():
    a = analyze("divide_by_zero_minimal.sol", "DivideByZeroMinimal", "divide")
    env = {"a": 4, "b": 0}
    trace = Interpreter(a.contract, a.lowered.function, env).run()
    assert trace.reverted
