"""Dataflow system and worklist fixpoint over (Val, Con) states."""

from __future__ import annotations

import dataclasses
import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .cfg import Cfg, Edge, extremal_labels
from .domain import (
    EMPTY, NON_NEGATIVE, BoolApprox, CompositeValue, Interval, Value, bool_op,
    bottom_for, default_for, iv_arith, iv_cmp, iv_leq, iv_meet, value_join, value_leq,
)
from .frontend import ast as A
from .ir import IrInstr, Lit, Var
from .symbolic import (
    COMPARE_OPS, BinOp, Const, Expr, Neg, Not, Ref, VarId, render,
)

MAX_VISITS = 16

ASSERT_FLAG = "assert/require"
CONDITION_FLAG = "condition"

_NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


class UnsupportedInstruction(Exception):
    pass


class IterationBudgetExceeded(Exception):
    pass


def negate(e: Expr) -> Expr:
    if isinstance(e, BinOp) and e.op in _NEGATED:
        return BinOp(_NEGATED[e.op], e.left, e.right)
    if isinstance(e, Not):
        return e.operand
    return Not(e)


@dataclass(frozen=True)
class Constraint:
    symbol: VarId
    polarity: bool
    expr: Expr
    origin: str          # Require | Assert | BranchTrue | BranchFalse | LoopInvariant
    edge: tuple[int, int]

    @property
    def key(self) -> tuple[str, bool]:
        return (self.symbol.name, self.polarity)

    @property
    def text(self) -> str:
        return render(self.expr if self.polarity else negate(self.expr))

    def __str__(self) -> str:
        return repr(self.key)


@dataclass(frozen=True)
class AnalysisInfo:
    vals: Mapping[str, Value]
    con: frozenset = frozenset()
    versions: Mapping[str, int] = field(default_factory=dict)
    # SSA definitions of scalar variables and cells
    defs: Mapping[VarId, Expr] = field(default_factory=dict)
    # defining expression of each temporary
    exprs: Mapping[str, Expr] = field(default_factory=dict)
    flags: Mapping[str, str] = field(default_factory=dict)
    reachable: bool = True

    def replace(self, **kw) -> "AnalysisInfo":
        return dataclasses.replace(self, **kw)

    def version(self, name: str) -> int:
        return self.versions.get(name, 0)


def constraint_order(c: Constraint):
    name = c.symbol.name
    num = int(name.split("_")[1]) if name.startswith("TMP_") else -1
    return (num, name, not c.polarity)


# ---------------------------------------------------------------------------
# join / order
# ---------------------------------------------------------------------------

def join_info(infos: list[AnalysisInfo], phis: Optional[Mapping[str, int]] = None,
              widen_from: Optional[AnalysisInfo] = None) -> AnalysisInfo:
    """Pointwise join of values, intersection of constraints.

    With ``widen_from`` the joined values are widened against that
    earlier state (loop heads).
    """
    if not infos:
        raise ValueError("join of no states")
    vals: dict[str, Value] = {}
    for info in infos:
        for name, v in info.vals.items():
            vals[name] = value_join(vals[name], v) if name in vals else v
    con = frozenset.intersection(*(i.con for i in infos))
    versions: dict[str, int] = {}
    for info in infos:
        for name, v in info.versions.items():
            versions[name] = max(versions.get(name, 0), v)
    if phis:
        versions.update(phis)
    defs = dict(infos[0].defs)
    for info in infos[1:]:
        defs = {k: v for k, v in defs.items() if info.defs.get(k) == v}
    exprs: dict[str, Expr] = {}
    dropped: set[str] = set()
    for info in infos:
        for name, e in info.exprs.items():
            if name in exprs and exprs[name] != e:
                dropped.add(name)
            exprs.setdefault(name, e)
    for name in dropped:
        del exprs[name]
    flags: dict[str, str] = {}
    for info in infos:
        flags.update(info.flags)
    out = AnalysisInfo(vals, con, versions, defs, exprs, flags, any(i.reachable for i in infos))
    if widen_from is not None:
        widened = {}
        for name, v in out.vals.items():
            old = widen_from.vals.get(name)
            widened[name] = v if old is None else value_join(old, v, widen=True)
        out = out.replace(vals=widened)
    return out


def leq_info(a: AnalysisInfo, b: AnalysisInfo) -> bool:
    """Values contained pointwise and Con(a) a superset of Con(b)."""
    for name, v in a.vals.items():
        if name not in b.vals or not value_leq(v, b.vals[name]):
            return False
    return a.con >= b.con


# ---------------------------------------------------------------------------
# transfer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Seg:
    kind: str                 # "index" | "member"
    key: object               # int | str (versioned key text) | field name
    index: Interval = EMPTY   # index interval for "index"
    type: A.MiniSolType = None

    @property
    def text(self) -> str:
        return f"[{self.key}]" if self.kind == "index" else f".{self.key}"


@dataclass(frozen=True)
class Event:
    """Hazard observed while executing a node."""

    kind: str                 # "division" | "index"
    label: int
    line: int
    detail: str
    interval: Interval


def _may_alias(a, b) -> bool:
    return not (isinstance(a, int) and isinstance(b, int) and a != b)


def _fixed_range(comp: CompositeValue, index: Interval) -> Interval:
    return iv_meet(index, Interval(0, comp.fixed_length - 1))


def read_key(comp: CompositeValue, seg: Seg) -> Value:
    if comp.bottom:
        return bottom_for(seg.type)
    if comp.fixed_length is not None:
        r = _fixed_range(comp, seg.index)
        out = bottom_for(seg.type)
        if not r.empty:
            for i in range(int(r.lo), int(r.hi) + 1):
                out = value_join(out, comp.items[i])
        return out
    if seg.key in comp.items:
        return comp.items[seg.key]
    out = comp.default if comp.default is not None else bottom_for(seg.type)
    for k, v in comp.items.items():
        if _may_alias(k, seg.key):
            out = value_join(out, v)
    return out


def read_path(value: Value, segs) -> Value:
    for seg in segs:
        if not isinstance(value, CompositeValue):
            raise UnsupportedInstruction(f"access {seg.text} on a scalar")
        if seg.kind == "member":
            if value.bottom:
                value = bottom_for(seg.type)
            elif value.kind == "array" and seg.key == "length":
                value = value.length
            else:
                value = value.items.get(seg.key, bottom_for(seg.type))
        else:
            value = read_key(value, seg)
    return value


def write_path(value: CompositeValue, segs, new: Value) -> CompositeValue:
    seg, rest = segs[0], segs[1:]

    def put(old: Value) -> Value:
        return write_path(old, rest, new) if rest else new

    if seg.kind == "member":
        return value.with_item(seg.key, put(value.items.get(seg.key, bottom_for(seg.type))))
    items = dict(value.items)
    if value.fixed_length is not None:
        r = _fixed_range(value, seg.index)
        if r.empty:
            return value
        if r.is_const():
            items[int(r.lo)] = put(items[int(r.lo)])
        else:
            for i in range(int(r.lo), int(r.hi) + 1):
                items[i] = value_join(items[i], put(items[i]))
    else:
        for k in list(items):
            if k != seg.key and _may_alias(k, seg.key):
                items[k] = value_join(items[k], put(items[k]))
        items[seg.key] = put(read_key(value, seg))
    return CompositeValue(value.kind, items, value.default, value.fixed_length, value.length)


def _sort(t) -> str:
    return "bool" if isinstance(t, A.BoolType) else "int"


def _unsigned(t) -> bool:
    return isinstance(t, (A.UIntType, A.AddressType))


class _NodeRun:
    """Executes the instructions of one node over a mutable copy of a state."""

    def __init__(self, cfg: Cfg, label: int, info: AnalysisInfo,
                 refine: Optional[Callable[[VarId], Optional[Interval]]] = None):
        self.cfg = cfg
        self.symbols = cfg.symbols
        self.label = label
        self.vals = dict(info.vals)
        self.versions = dict(info.versions)
        self.defs = dict(info.defs)
        self.exprs = dict(info.exprs)
        self.flags = dict(info.flags)
        self.info = info
        self.refs: dict[str, tuple[str, tuple[Seg, ...]]] = {}
        self.refine = refine
        self.events: list[Event] = []
        self.line = 0

    # -- naming -----------------------------------------------------------------

    def var_id(self, name: str, path: tuple[Seg, ...] = ()) -> VarId:
        sym = self.symbols[name]
        return VarId(name, self.versions.get(name, 0), sym.origin, tuple(s.text for s in path))

    def location(self, op: Var) -> tuple[str, tuple[Seg, ...]]:
        if op.name in self.refs:
            return self.refs[op.name]
        return op.name, ()

    def type_of(self, op) -> A.MiniSolType:
        if isinstance(op, Lit):
            return A.BoolType() if isinstance(op.value, bool) else A.UIntType()
        return self.symbols[op.name].type

    # -- values -----------------------------------------------------------------

    def _refined(self, vid: VarId, v: Value) -> Value:
        if self.refine is not None and isinstance(v, Interval):
            r = self.refine(vid)
            if r is not None:
                return iv_meet(v, r)
        return v

    def value(self, op, zero_type=None) -> Value:
        if isinstance(op, Lit):
            if op.value is None:
                return default_for(zero_type, "local")
            if isinstance(op.value, bool):
                return BoolApprox.of(op.value)
            if isinstance(op.value, int):
                return Interval.const(op.value)
            return Interval(NON_NEGATIVE.lo, NON_NEGATIVE.hi)
        origin = self.symbols[op.name].origin
        if origin == "temporary":
            return self.vals.get(op.name, bottom_for(self.symbols[op.name].type))
        root, path = self.location(op)
        v = read_path(self.vals[root], path)
        return self._refined(self.var_id(root, path), v)

    def sym(self, op, zero_type=None) -> Optional[Expr]:
        if isinstance(op, Lit):
            if op.value is None:
                if isinstance(zero_type, A.BoolType):
                    return Const(False)
                return Const(0) if A.is_numeric(zero_type) else None
            if isinstance(op.value, (bool, int)):
                return Const(op.value)
            return None
        t = self.symbols[op.name].type
        if A.is_composite(t) or isinstance(t, A.StringType):
            return None
        origin = self.symbols[op.name].origin
        if origin == "temporary":
            e = self.exprs.get(op.name)
            return e if e is not None else Ref(VarId(op.name, 0, "temporary"), _sort(t), _unsigned(t))
        root, path = self.location(op)
        return Ref(self.var_id(root, path), _sort(t), _unsigned(t))

    # -- instructions -----------------------------------------------------------

    def set_temp(self, dest: Var, value: Value, expr: Optional[Expr]) -> None:
        self.vals[dest.name] = value
        if expr is None:
            self.exprs.pop(dest.name, None)
        else:
            self.exprs[dest.name] = expr

    def binop(self, instr: IrInstr) -> None:
        a_op, b_op = instr.operands
        a, b = self.value(a_op), self.value(b_op)
        sa, sb = self.sym(a_op), self.sym(b_op)
        expr = BinOp(instr.op, sa, sb) if sa is not None and sb is not None else None
        op = instr.op
        if op in ("&&", "||"):
            result = bool_op("and" if op == "&&" else "or", a, b)
        elif op in COMPARE_OPS:
            if isinstance(a, BoolApprox):
                result = self._bool_eq(a, b, op)
            else:
                result = iv_cmp(op, a, b)
        else:
            result, flags = iv_arith(op, a, b, self.symbols[instr.dest.name].type)
            if op in ("/", "%") and not b.empty and 0 in b:
                self.events.append(Event("division", self.label, instr.line,
                                         f"{render(sb) if sb is not None else b_op}", b))
        self.set_temp(instr.dest, result, expr)

    @staticmethod
    def _bool_eq(a: BoolApprox, b: BoolApprox, op: str) -> BoolApprox:
        if BoolApprox.EMPTY in (a, b):
            return BoolApprox.EMPTY
        if BoolApprox.UNKNOWN in (a, b):
            return BoolApprox.UNKNOWN
        return BoolApprox.of((a is b) == (op == "=="))

    def unop(self, instr: IrInstr) -> None:
        (operand,) = instr.operands
        v, s = self.value(operand), self.sym(operand)
        if instr.op == "!":
            self.set_temp(instr.dest, bool_op("not", v), None if s is None else Not(s))
        else:
            r = EMPTY if v.empty else Interval(-v.hi, -v.lo)
            self.set_temp(instr.dest, r, None if s is None else Neg(s))

    def assign(self, instr: IrInstr) -> None:
        dest = instr.dest
        dtype = self.symbols[dest.name].type
        (src,) = instr.operands
        v = self.value(src, dtype)
        s = self.sym(src, dtype)
        if instr.op == "convert" and isinstance(v, Interval) and _unsigned(dtype) \
                and not iv_leq(v, NON_NEGATIVE):
            v, s = NON_NEGATIVE, None
        if self.symbols[dest.name].origin == "temporary":
            self.set_temp(dest, v, s)
            return
        self.vals[dest.name] = v
        self.versions[dest.name] = instr.version
        if s is not None:
            self.defs[self.var_id(dest.name)] = s

    def index_seg(self, index_op, elem_type) -> Seg:
        iv = self.value(index_op)
        if isinstance(index_op, Lit):
            key = index_op.value
        else:
            s = self.sym(index_op)
            key = render(s, versioned=True) if s is not None else index_op.name
        return Seg("index", key, iv if isinstance(iv, Interval) else EMPTY, elem_type)

    def check_bounds(self, root: str, path, seg: Seg) -> None:
        container = read_path(self.vals[root], path)
        if isinstance(container, CompositeValue) and container.fixed_length is not None \
                and not seg.index.empty:
            if not iv_leq(seg.index, Interval(0, container.fixed_length - 1)):
                name = self.var_id(root, path).display
                self.events.append(Event("index", self.label, self.line,
                                         f"{name}[{VarId(str(seg.key)).display}]", seg.index))

    def index_read(self, instr: IrInstr) -> None:
        base, index = instr.operands
        root, path = self.location(base)
        seg = self.index_seg(index, self.symbols[instr.dest.name].type)
        self.check_bounds(root, path, seg)
        self.refs[instr.dest.name] = (root, path + (seg,))

    def member_read(self, instr: IrInstr) -> None:
        (base,) = instr.operands
        root, path = self.location(base)
        seg = Seg("member", instr.op, EMPTY, self.symbols[instr.dest.name].type)
        self.refs[instr.dest.name] = (root, path + (seg,))

    def write(self, instr: IrInstr) -> None:
        if instr.kind == "INDEX_WRITE":
            base, index, src = instr.operands
            root, path = self.location(base)
            container = read_path(self.vals[root], path)
            elem = self._element_type(root, path, "index", None)
            seg = self.index_seg(index, elem)
            self.check_bounds(root, path, seg)
        else:
            base, src = instr.operands
            root, path = self.location(base)
            elem = self._element_type(root, path, "member", instr.op)
            seg = Seg("member", instr.op, EMPTY, elem)
        full = path + (seg,)
        v = self.value(src, elem)
        s = self.sym(src, elem)
        container = self.vals[root]
        if isinstance(container, CompositeValue):
            self.vals[root] = write_path(container, full, v)
        self.versions[root] = instr.version
        if s is not None and not A.is_composite(elem):
            self.defs[self.var_id(root, full)] = s

    def _element_type(self, root: str, path, kind: str, member: Optional[str]):
        t = self.symbols[root].type
        for seg in path:
            t = seg.type
        if kind == "member":
            return t.field_type(member) if isinstance(t, A.StructType) else A.UIntType()
        return t.element if isinstance(t, A.ArrayType) else t.value

    def builtin_call(self, instr: IrInstr) -> None:
        if instr.dest is not None:
            self.set_temp(instr.dest, BoolApprox.UNKNOWN, None)

    def run(self) -> AnalysisInfo:
        node = self.cfg.nodes[self.label]
        for instr in node.instrs:
            self.line = instr.line
            kind = instr.kind
            if kind == "BINOP":
                self.binop(instr)
            elif kind == "UNOP":
                self.unop(instr)
            elif kind == "ASSIGN":
                self.assign(instr)
            elif kind == "INDEX_READ":
                self.index_read(instr)
            elif kind == "MEMBER_READ":
                self.member_read(instr)
            elif kind in ("INDEX_WRITE", "MEMBER_WRITE"):
                self.write(instr)
            elif kind == "CONDITION":
                self.flags[instr.operands[0].name] = CONDITION_FLAG
            elif kind in ("REQUIRE", "ASSERT"):
                self.flags[instr.operands[0].name] = ASSERT_FLAG
            elif kind == "BUILTIN_CALL":
                self.builtin_call(instr)
            elif kind in ("REVERT", "RETURN", "NOP"):
                pass
            else:
                raise UnsupportedInstruction(kind)
        return self.info.replace(vals=self.vals, versions=self.versions, defs=self.defs,
                                 exprs=self.exprs, flags=self.flags)


def execute_node(cfg: Cfg, label: int, info: AnalysisInfo,
                 refine: Optional[Callable[[VarId], Optional[Interval]]] = None
                 ) -> tuple[AnalysisInfo, list[Event]]:
    """Run a node's instructions; ``refine`` may narrow any numeric read."""
    run = _NodeRun(cfg, label, info, refine)
    out = run.run()
    return out, run.events


def transfer(cfg: Cfg, label: int, info: AnalysisInfo) -> AnalysisInfo:
    return execute_node(cfg, label, info)[0]


def cell_value(info: AnalysisInfo, cfg: Cfg, var: VarId) -> Optional[Value]:
    """Current value of a variable or cell symbol, None for stale versions."""
    if info.version(var.name) != var.version or var.name not in info.vals:
        return None
    value = info.vals[var.name]
    t = cfg.symbols[var.name].type
    for text in var.path:
        if not isinstance(value, CompositeValue):
            return None
        if text.startswith("."):
            field_name = text[1:]
            if value.kind == "array" and field_name == "length":
                value, t = value.length, A.UIntType()
                continue
            t = t.field_type(field_name)
            value = value.items.get(field_name, bottom_for(t)) if not value.bottom else bottom_for(t)
            continue
        key_text = text[1:-1]
        t = t.element if isinstance(t, A.ArrayType) else t.value
        try:
            key = int(key_text)
            index = Interval.const(key)
        except ValueError:
            key, index = key_text, Interval(0, float("inf"))
        value = read_key(value, Seg("index", key, index, t))
    return value


def controlling_instr(cfg: Cfg, label: int) -> Optional[IrInstr]:
    for instr in reversed(cfg.nodes[label].instrs):
        if instr.kind in ("CONDITION", "REQUIRE", "ASSERT"):
            return instr
    return None


def edge_apply(cfg: Cfg, edge: Edge, info: AnalysisInfo) -> Optional[AnalysisInfo]:
    """State carried along ``edge``; None when the edge cannot be taken."""
    con = set(info.con)
    instr = controlling_instr(cfg, edge.src)
    if instr is not None:
        tmp = instr.operands[0].name
        bv = info.vals.get(tmp, BoolApprox.UNKNOWN)
        polarity, origin = None, None
        if instr.kind == "CONDITION":
            if edge.kind == "BranchTrue":
                polarity, origin = True, "BranchTrue"
            elif edge.kind == "BranchFalse":
                polarity, origin = False, "BranchFalse"
            elif edge.kind == "LoopBody" or (edge.kind == "Back" and edge.src == edge.dst):
                polarity, origin = True, "LoopInvariant"
            elif edge.kind == "LoopExit" and bv in (BoolApprox.TRUE, BoolApprox.EMPTY):
                return None
        else:
            polarity, origin = True, "Require" if instr.kind == "REQUIRE" else "Assert"
        if polarity is not None:
            if not bv.may_be(polarity):
                return None
            expr = info.exprs.get(tmp, Ref(VarId(tmp, 0, "temporary"), "bool"))
            c = Constraint(VarId(tmp, 0, "temporary"), polarity, expr, origin, edge.pair)
            con = {x for x in con if x.key != c.key}
            con.add(c)
    if edge.scope_end:
        con = {c for c in con if c.edge[0] not in edge.scope_end}
    return info.replace(con=frozenset(con))


# ---------------------------------------------------------------------------
# system and solver
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    entries: dict[int, AnalysisInfo]
    outs: dict[int, AnalysisInfo]
    counts: Counter
    history: list[tuple[int, AnalysisInfo]]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


class DataflowSystem:
    """(Lab, Ext, Flw, (D, leq), extremal value, transfer) for one function."""

    def __init__(self, cfg: Cfg):
        self.cfg = cfg
        self.labels = cfg.labels
        self.extremal = extremal_labels(cfg)
        self.flow = [(e.src, e.dst) for e in cfg.edges]
        self.direction = "forward"
        self.extremal_value = self.initial_info()

    def initial_info(self) -> AnalysisInfo:
        lowered = self.cfg.lowered
        vals: dict[str, Value] = {}
        for name, sym in lowered.symbols.items():
            if sym.origin in ("temporary", "reference"):
                continue
            if sym.origin == "local":
                vals[name] = (default_for(sym.type, "local") if name in lowered.zero_init
                              else bottom_for(sym.type))
            else:
                vals[name] = default_for(sym.type, sym.origin)
        for sv in lowered.contract.state_vars:
            if sv.constant and isinstance(sv.init, A.IntLit):
                vals[sv.name] = Interval.const(sv.init.value)
        return AnalysisInfo(vals)

    join = staticmethod(join_info)
    leq = staticmethod(leq_info)

    def transfer(self, label: int, info: AnalysisInfo) -> AnalysisInfo:
        return transfer(self.cfg, label, info)

    def guard_havoc(self, label: int, info: AnalysisInfo) -> AnalysisInfo:
        """Join the variables read by a loop guard with their type default."""
        vals = dict(info.vals)
        for instr in self.cfg.nodes[label].instrs:
            for op in instr.operands:
                if not isinstance(op, Var):
                    continue
                sym = self.cfg.symbols[op.name]
                if sym.origin in ("parameter", "local", "state") and not A.is_composite(sym.type) \
                        and op.name in vals:
                    vals[op.name] = value_join(vals[op.name], default_for(sym.type, "parameter"))
        return info.replace(vals=vals)

    def entry_state(self, label: int, outs: dict[int, AnalysisInfo],
                    previous: Optional[AnalysisInfo]) -> Optional[AnalysisInfo]:
        contribs = []
        if label in self.extremal:
            contribs.append(self.extremal_value)
        for edge in self.cfg.preds(label):
            if edge.src in outs:
                carried = edge_apply(self.cfg, edge, outs[edge.src])
                if carried is not None:
                    contribs.append(carried)
        if not contribs:
            return None
        is_head = label in self.cfg.loop_heads
        info = join_info(contribs, self.cfg.phis.get(label))
        if is_head:
            info = self.guard_havoc(label, info)
            if previous is not None:
                info = join_info([info], widen_from=previous)
        return info

    def solve(self) -> SolveResult:
        """Worklist iteration in label order until no entry state changes."""
        entries: dict[int, AnalysisInfo] = {}
        outs: dict[int, AnalysisInfo] = {}
        counts: Counter = Counter()
        history: list[tuple[int, AnalysisInfo]] = []
        budget = len(self.labels) * MAX_VISITS
        work = sorted(self.extremal)
        queued = set(work)
        heapq.heapify(work)
        while work:
            label = heapq.heappop(work)
            queued.discard(label)
            new = self.entry_state(label, outs, entries.get(label))
            if new is None or entries.get(label) == new:
                continue
            counts[label] += 1
            if counts[label] > MAX_VISITS or sum(counts.values()) > budget:
                raise IterationBudgetExceeded(
                    f"node {label} processed {counts[label]} times")
            entries[label] = new
            history.append((label, new))
            out = self.transfer(label, new)
            if outs.get(label) != out:
                outs[label] = out
                for edge in self.cfg.succs(label):
                    if edge.dst not in queued:
                        queued.add(edge.dst)
                        heapq.heappush(work, edge.dst)
        return SolveResult(entries, outs, counts, history)


def worklist_solve(system: DataflowSystem) -> SolveResult:
    return system.solve()
