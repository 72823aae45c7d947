import pytest

from helpers import CORPUS_FUNCTIONS, LOOP_FREE, analyze
from solinterval.cfg import build_cfg
from solinterval.domain import EMPTY, POS_INF, BoolApprox, Interval, value_leq
from solinterval.engine import (
    MAX_VISITS, AnalysisInfo, Constraint, DataflowSystem, constraint_order, edge_apply,
    join_info, leq_info, transfer, worklist_solve,
)
from solinterval.frontend import check_types, parse_source
from solinterval.ir import lower_contract
from solinterval.symbolic import Ref, VarId, variables

INF = POS_INF

# statement -> (x, index, value, required constraints, optional extras)
MAGIC_STATES = {
    1: ((0, INF), None, None, [], []),
    2: ((0, INF), (0, 0), None, [], []),
    3: ((0, INF), (0, 0), (0, INF), [], []),
    4: ((0, INF), (0, INF), (0, INF), ["x < 15"], []),
    5: ((0, INF), (0, INF), (0, INF), ["x < 15", "index < x"], []),
    6: ((0, INF), (0, INF), (0, INF), ["x < 15", "index < x", "index % 2 == 0"], []),
    7: ((0, INF), (0, INF), (0, INF), ["x < 15", "index < x", "index % 2 != 0"], []),
    8: ((0, INF), (0, INF), (0, INF), ["x < 15"], ["index < x"]),
    9: ((0, INF), (0, INF), (0, INF), ["x < 15"], ["index < x"]),
}


def iv(pair):
    return EMPTY if pair is None else Interval(*pair)


def texts(info):
    return [c.text for c in sorted(info.con, key=constraint_order)]


@pytest.mark.parametrize("row", sorted(MAGIC_STATES))
def test_magic_number_state_row(row):
    entries = analyze("magic_number.sol", "", "magicNumber").entries
    x, index, value, required, extra = MAGIC_STATES[row]
    info = entries[row]
    assert (info.vals["x"], info.vals["index"], info.vals["value"]) == (iv(x), iv(index), iv(value))
    got = texts(info)
    assert set(required) <= set(got) <= set(required) | set(extra)


def test_magic_number_state_rows_one_to_seven_exact():
    entries = analyze("magic_number.sol", "", "magicNumber").entries
    for row in range(1, 8):
        assert texts(entries[row]) == MAGIC_STATES[row][3]


def test_version_pinning_after_increment():
    a = analyze("magic_number.sol", "", "magicNumber")
    info = a.entries[9]
    [c] = [c for c in info.con if c.text == "x < 15"]
    [xref] = [v for v in variables(c.expr) if v.name == "x"]
    assert xref.version < a.cfg.nodes[8].instrs[-1].version


def fn_cfg(src, name="f"):
    [c] = parse_source(src)
    return build_cfg(lower_contract(check_types(c))[name])


def test_declaration_transfer():
    cfg = analyze("magic_number.sol", "", "magicNumber").cfg
    system = DataflowSystem(cfg)
    start = system.initial_info()
    assert start.vals["index"] == EMPTY
    after1 = transfer(cfg, 1, start)
    assert after1.vals["index"] == Interval(0, 0)
    after2 = transfer(cfg, 2, after1)
    assert after2.vals["value"] == Interval(0, INF)


def test_condition_node_keeps_program_values():
    a = analyze("magic_number.sol", "", "magicNumber")
    before = a.entries[5]
    after = transfer(a.cfg, 5, before)
    for name in ("x", "index", "value"):
        assert after.vals[name] == before.vals[name]


def _edge(cfg, src, dst):
    return next(e for e in cfg.edges if (e.src, e.dst) == (src, dst))


def test_edge_apply_examples():
    a = analyze("magic_number.sol", "", "magicNumber")
    cfg, outs = a.cfg, a.solve.outs
    body = edge_apply(cfg, _edge(cfg, 4, 5), outs[4])
    assert texts(body) == ["x < 15", "index < x"]
    assert any(c.origin == "LoopInvariant" for c in body.con)
    odd = edge_apply(cfg, _edge(cfg, 5, 7), outs[5])
    assert "index % 2 != 0" in texts(odd)
    back = edge_apply(cfg, _edge(cfg, 8, 4), outs[8])
    assert texts(back) == ["x < 15"]
    exit_ = edge_apply(cfg, _edge(cfg, 4, 9), outs[4])
    assert texts(exit_) == ["x < 15"]


def _info(con=(), **vals):
    return AnalysisInfo(vals, frozenset(con))


def _c(name, pol=True, edge=(1, 2)):
    return Constraint(VarId(name, 0, "temporary"), pol, Ref(VarId("v"), "int"), "Require", edge)


def test_join_examples():
    base, even, odd = _c("TMP_0"), _c("TMP_4", True), _c("TMP_4", False)
    joined = join_info([_info([base, even], x=Interval(0, 1)), _info([base, odd], x=Interval(4, 5))])
    assert joined.con == frozenset([base])
    assert joined.vals["x"] == Interval(0, 5)
    same = _info([base], x=Interval(0, 0))
    assert join_info([same, same]) == same


def test_leq_examples():
    c1, c2 = _c("TMP_0"), _c("TMP_1")
    a = _info([c1, c2], x=Interval(0, 1))
    b = _info([c1], x=Interval(0, 1))
    assert leq_info(a, b) and leq_info(a, a)
    assert not leq_info(_info([c1, c2], x=Interval(0, 9)), b)


def test_straight_line_processed_once():
    cfg = fn_cfg("contract C { function f(uint a) public { uint b = a + 1; uint c = b * 2; a = c; } }")
    result = worklist_solve(DataflowSystem(cfg))
    assert dict(result.counts) == {label: 1 for label in cfg.labels}


def test_while_true_widens_and_terminates():
    cfg = fn_cfg("contract C { function f() public { uint x = 0; while (true) { x = x + 1; } } }")
    result = worklist_solve(DataflowSystem(cfg))
    head = min(cfg.loop_heads)
    assert result.entries[head].vals["x"] == Interval(0, INF)
    assert max(result.counts.values()) <= MAX_VISITS


@pytest.mark.parametrize("case", CORPUS_FUNCTIONS, ids=lambda c: f"{c[1]}.{c[2]}")
def test_termination_bound(case):
    a = analyze(*case[:3])
    n = len(a.cfg.labels)
    assert max(a.solve.counts.values()) <= MAX_VISITS
    assert a.solve.total <= n * MAX_VISITS
    if case[3]:
        processed = [label for label in a.cfg.labels if label in a.entries]
        assert a.solve.total == len(processed)


@pytest.mark.parametrize("case", CORPUS_FUNCTIONS, ids=lambda c: f"{c[1]}.{c[2]}")
def test_monotone_entries(case):
    a = analyze(*case[:3])
    last = {}
    for label, info in a.solve.history:
        if label in last:
            assert leq_info(last[label], info) or last[label].vals == info.vals
            for name, v in last[label].vals.items():
                assert value_leq(v, info.vals[name])
        last[label] = info


@pytest.mark.parametrize("case", CORPUS_FUNCTIONS, ids=lambda c: f"{c[1]}.{c[2]}")
def test_stable_under_extra_sweep(case):
    a = analyze(*case[:3])
    system = DataflowSystem(a.cfg)
    for label in a.cfg.labels:
        again = system.entry_state(label, a.solve.outs, a.entries.get(label))
        assert again == a.entries.get(label)


@pytest.mark.parametrize("case", [c for c in CORPUS_FUNCTIONS if not c[3]], ids=lambda c: c[2])
def test_constraints_flow_downward_only(case):
    a = analyze(*case[:3])
    for head, region in a.cfg.loop_regions.items():
        info = a.entries.get(head)
        if info is None:
            continue
        assert not any(c.edge[0] in region and c.edge[1] in region for c in info.con)


@pytest.mark.parametrize("case", LOOP_FREE, ids=lambda c: c[2])
def test_loop_free_has_no_widening_points(case):
    assert not analyze(*case[:3]).cfg.loop_heads


def test_local_is_bottom_until_declared_then_zero():
    cfg = fn_cfg("contract C { function f(uint a) public { uint b; b = a; } }")
    result = worklist_solve(DataflowSystem(cfg))
    assert result.entries[1].vals["b"] == EMPTY
    assert result.entries[2].vals["b"] == Interval(0, 0)


def test_bool_parameter_default():
    cfg = fn_cfg("contract C { function f(bool a) public { bool b = !a; } }")
    result = worklist_solve(DataflowSystem(cfg))
    assert result.entries[1].vals["a"] is BoolApprox.UNKNOWN
    assert result.outs[1].vals["b"] is BoolApprox.UNKNOWN
