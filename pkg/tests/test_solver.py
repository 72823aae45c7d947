import pytest

from helpers import CORPUS_FUNCTIONS, HAVE_Z3, Z3_COMMAND, analyze, brute_force_models
from solinterval.domain import Interval
from solinterval.solver import (
    REACHABLE, SAT, UNKNOWN, UNREACHABLE, UNSAT, BuiltinBackend, Decl, ExternalSmtBackend,
    SatQuery, backend_chain, classify_reachability, decide_builtin, decide_external,
    emit_smtlib, encode_state,
)
from solinterval.solver.external import run_script
from solinterval.symbolic import BinOp, Const, Ref, VarId, evaluate

needs_z3 = pytest.mark.skipif(not HAVE_Z3, reason="z3 binary not installed")


def var(name, origin="parameter"):
    return VarId(name, 0, origin)


def tmp(k):
    return VarId(f"TMP_{k}", 0, "temporary")


def query(atoms, unsigned=True):
    """Build a query asserting each (op, left, right) atom true."""
    names = sorted({x for _, a, b in atoms for x in (a, b) if isinstance(x, str)})
    decls = tuple(Decl(var(n), "int", unsigned) for n in names)

    def term(x):
        if isinstance(x, str):
            return Ref(var(x), "int", unsigned)
        return Const(x) if isinstance(x, int) else x

    defs = tuple((tmp(i), BinOp(op, term(a), term(b))) for i, (op, a, b) in enumerate(atoms))
    return SatQuery(decls, (), defs, (), tuple((t, True) for t, _ in defs))


def test_withdraw_assert_encoding():
    a = analyze("deposit_contract.sol", "DepositContract", "withdraw")
    q = encode_state(a.entries[3], a.cfg)
    assert [d.var.smt_name for d in q.declarations] == ["deposits[msg.sender]"]
    [(sym, expr)] = q.definitions
    assert sym.name == "TMP_3" and str(expr) != "" and q.assertions == ((sym, True),)
    assert q.bounds == ()
    script = emit_smtlib(q)
    assert "(declare-const |deposits[msg.sender]| Int)" in script
    assert "(assert (> |deposits[msg.sender]| 0))" in script


def test_empty_constraints_sat():
    a = analyze("magic_number.sol", "", "magicNumber")
    q = encode_state(a.entries[1], a.cfg)
    assert q.assertions == ()
    assert decide_builtin(q).status == SAT


def test_default_interval_not_bounded():
    a = analyze("magic_number.sol", "", "magicNumber")
    q = encode_state(a.entries[4], a.cfg)
    assert all(v.name != "x" for v, _ in q.bounds)


def test_builtin_examples():
    assert decide_builtin(query([(">", "d", 0), ("==", "d", 0)])).status == UNSAT
    r = decide_builtin(query([("<", "x", 15)]))
    assert r.status == SAT and r.model[var("x")] == 0
    parity = query([("==", BinOp("%", Ref(var("index"), "int"), Const(2)), 0)])
    parity = SatQuery((Decl(var("index"), "int", True),), (), parity.definitions, (), parity.assertions)
    assert decide_builtin(parity).status == UNKNOWN


def test_builtin_uses_bounds():
    q = query([("<", "x", 3)])
    q = SatQuery(q.declarations, ((var("x"), Interval(5, 9)),), q.definitions, (), q.assertions)
    assert decide_builtin(q).status == UNSAT


def test_smtlib_examples():
    assert emit_smtlib(SatQuery()) == "(set-logic QF_NIA)\n(check-sat)\n"
    q = SatQuery((Decl(var("v"), "int", False),), ((var("v"), Interval(0, float("inf"))),))
    script = emit_smtlib(q)
    assert script.count("(assert (>= v 0))") == 1 and "<=" not in script


def test_smtlib_negative_polarity():
    q = query([("<", "x", 3)])
    q = SatQuery(q.declarations, (), q.definitions, (), ((tmp(0), False),))
    assert "(assert (not (< x 3)))" in emit_smtlib(q)


def test_smtlib_deterministic():
    a = analyze("bid_contract.sol", "BidContract", "bid")
    for label in a.cfg.labels:
        q1 = encode_state(a.entries[label], a.cfg)
        q2 = encode_state(a.entries[label], a.cfg)
        assert emit_smtlib(q1) == emit_smtlib(q2)


def test_missing_solver_binary():
    r = decide_external(SatQuery(), "definitely-not-a-solver-xyz")
    assert r.status == UNKNOWN and r.diagnostic.startswith("ProcessError")


def test_solver_garbage_output_unknown():
    r = run_script("(check-sat)\n", "echo maybe")
    assert r.status == UNKNOWN


@needs_z3
def test_external_examples():
    a = analyze("deposit_contract.sol", "DepositContract", "withdraw")
    end = encode_state(a.entries[4], a.cfg)
    assert "(assert (= |deposits[msg.sender]| 0))" in emit_smtlib(end)
    assert decide_external(end, Z3_COMMAND).status == UNSAT
    assert decide_external(SatQuery(), Z3_COMMAND).status == SAT
    assert decide_external(encode_state(a.entries[3], a.cfg), Z3_COMMAND).status == SAT


def test_classify_bid_and_withdraw():
    bid = analyze("bid_contract.sol", "BidContract", "bid")
    assert bid.verdicts[5].reachability == UNREACHABLE
    assert bid.cfg.nodes[5].source.startswith("revert")
    withdraw = analyze("deposit_contract.sol", "DepositContract", "withdraw")
    assert withdraw.verdicts[4].reachability == UNREACHABLE
    assert withdraw.cfg.nodes[4].kind == "END_FUNCTION"


def test_straight_line_all_reachable():
    a = analyze("improper_data_validation.sol", "ImproperDataValidation", "participate")
    assert {v.reachability for v in a.verdicts.values()} == {REACHABLE}


def test_unprocessed_node_skips_solver():
    class Exploding:
        name = "boom"

        def decide(self, q):
            raise AssertionError("solver must not be called")

    a = analyze("loops.sol", "Loops", "forever")
    missing = [label for label in a.cfg.labels if label not in a.entries]
    assert missing
    verdicts = classify_reachability({}, a.cfg, [Exploding()])
    assert all(verdicts[label].reachability == UNREACHABLE for label in missing)


def test_chain_first_definitive_wins():
    class Fixed:
        def __init__(self, status):
            self.status = status
            self.calls = 0

        def decide(self, q):
            from solinterval.solver import SatResult
            self.calls += 1
            return SatResult(self.status)

    first, second = Fixed(UNKNOWN), Fixed(UNSAT)
    from solinterval.solver import decide
    assert decide(SatQuery(), [first, second]).status == UNSAT
    third = Fixed(SAT)
    assert decide(SatQuery(), [third, second]).status == SAT and second.calls == 1


def corpus_queries():
    out = []
    for case in CORPUS_FUNCTIONS:
        a = analyze(*case[:3])
        for label, v in a.verdicts.items():
            if v.query is not None:
                out.append((f"{case[1]}.{case[2]}:{label}", v.query))
    return out


@pytest.mark.parametrize("name,q", corpus_queries(), ids=lambda x: x if isinstance(x, str) else "")
def test_builtin_verdict_sound(name, q):
    r = decide_builtin(q)
    if r.status == SAT:
        env = dict(r.model)
        for sym, e in q.equations:
            env.setdefault(sym, evaluate(e, env))
        for sym, e in q.definitions:
            env[sym] = bool(evaluate(e, env))
        assert all(env[s] == p for s, p in q.assertions)
        assert all(env[v] in iv for v, iv in q.bounds)
    elif r.status == UNSAT:
        assert next(brute_force_models(q), None) is None


@needs_z3
@pytest.mark.parametrize("name,q", corpus_queries(), ids=lambda x: x if isinstance(x, str) else "")
def test_backend_agreement(name, q):
    r = decide_builtin(q)
    if r.definitive:
        assert decide_external(q, Z3_COMMAND).status == r.status


def test_backend_chain_shape():
    assert [b.name for b in backend_chain()] == ["builtin"]
    chain = backend_chain("z3 -in", 1234)
    assert isinstance(chain[0], BuiltinBackend) and isinstance(chain[1], ExternalSmtBackend)
    assert chain[1].timeout_ms == 1234
