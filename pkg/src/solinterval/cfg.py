"""Labelled control-flow graph over statement nodes."""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .frontend import ast as A
from .ir import IrInstr, LoweredFunction

EDGE_KINDS = ("Seq", "BranchTrue", "BranchFalse", "LoopBody", "LoopExit", "Back")


class EmptyFunction(Exception):
    pass


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str
    # constraints imposed from these labels go out of scope on this edge
    scope_end: frozenset[int] = frozenset()

    @property
    def pair(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass
class Node:
    label: int
    kind: str
    source: str
    line: int
    instrs: list[IrInstr]
    stmt: Optional[A.Stmt] = None

    @property
    def header(self) -> str:
        return f"{self.kind} {self.source}".rstrip()


@dataclass
class Cfg:
    nodes: dict[int, Node]
    edges: list[Edge]
    lowered: LoweredFunction
    loop_heads: set[int] = field(default_factory=set)
    # loop head -> labels of head and body
    loop_regions: dict[int, frozenset[int]] = field(default_factory=dict)
    # label -> {variable: version} merged at the node entry
    phis: dict[int, dict[str, int]] = field(default_factory=dict)
    direction: str = "forward"

    def __post_init__(self):
        self._succ: dict[int, list[Edge]] = defaultdict(list)
        self._pred: dict[int, list[Edge]] = defaultdict(list)
        for e in self.edges:
            self._succ[e.src].append(e)
            self._pred[e.dst].append(e)

    @property
    def labels(self) -> list[int]:
        return sorted(self.nodes)

    def succs(self, label: int) -> list[Edge]:
        return self._succ.get(label, [])

    def preds(self, label: int) -> list[Edge]:
        return self._pred.get(label, [])

    @property
    def symbols(self):
        return self.lowered.symbols

    def to_dot(self) -> str:
        fn = self.lowered.function.name
        lines = [f'digraph "{fn}" {{', "  node [shape=box];"]
        for label in self.labels:
            n = self.nodes[label]
            text = f"{label}: {n.header}".replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  n{label} [label="{text}"];')
        for e in self.edges:
            style = ", style=dashed" if e.kind == "Back" else ""
            lines.append(f'  n{e.src} -> n{e.dst} [label="{e.kind}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self, lowered: LoweredFunction):
        self.lowered = lowered
        self.label_of = {id(b.stmt): label for label, b in lowered.blocks}
        self.edges: list[Edge] = []
        self.loop_regions: dict[int, frozenset[int]] = {}

    def connect(self, pending, target: int) -> None:
        for src, kind, scope in pending:
            if kind == "LoopBody" and src == target:
                kind = "Back"
            self.edges.append(Edge(src, target, kind, frozenset(scope)))

    def labels_in(self, stmts) -> set[int]:
        return {self.label_of[id(s)] for s in A.walk_statements(A.Block(list(stmts)))}

    def block(self, stmts, pending):
        for s in stmts:
            pending = self.stmt(s, pending)
        return pending

    def stmt(self, s: A.Stmt, pending):
        if isinstance(s, A.Block):
            return self.block(s.stmts, pending)
        if isinstance(s, A.If):
            head = self.label_of[id(s)]
            self.connect(pending, head)
            exits = self.block(s.then.stmts, [(head, "BranchTrue", ())])
            if s.orelse is not None:
                exits += self.block(s.orelse.stmts, [(head, "BranchFalse", ())])
            else:
                exits.append((head, "BranchFalse", ()))
            region = {head} | self.labels_in(s.then.stmts)
            if s.orelse is not None:
                region |= self.labels_in(s.orelse.stmts)
            return [(src, kind, set(scope) | region) for src, kind, scope in exits]
        if isinstance(s, (A.While, A.For)):
            if isinstance(s, A.For) and s.init is not None:
                pending = self.stmt(s.init, pending)
            head = self.label_of[id(s)]
            self.connect(pending, head)
            body = list(s.body.stmts)
            if isinstance(s, A.For) and s.post is not None:
                body.append(s.post)
            exits = self.block(body, [(head, "LoopBody", ())])
            region = {head} | self.labels_in(body)
            self.loop_regions[head] = frozenset(region)
            for src, kind, scope in exits:
                self.edges.append(Edge(src, head, "Back", frozenset(set(scope) | region)))
            return [(head, "LoopExit", ())]
        label = self.label_of[id(s)]
        self.connect(pending, label)
        if isinstance(s, (A.Return, A.Revert)):
            return []
        return [(label, "Seq", ())]


def build_cfg(lowered: LoweredFunction) -> Cfg:
    nodes = {label: Node(label, b.kind, b.source, b.line, list(b.instrs), b.stmt)
             for label, b in lowered.blocks}
    builder = _Builder(lowered)
    exits = builder.block(lowered.function.body.stmts, [])
    if exits or not nodes:
        end = len(nodes) + 1
        nodes[end] = Node(end, "END_FUNCTION", "", _end_line(lowered.function), [])
        builder.connect(exits, end)
    cfg = Cfg(nodes, builder.edges, lowered, set(builder.loop_regions), builder.loop_regions)
    _assign_versions(cfg)
    return cfg


def _end_line(fn: A.FunctionAst) -> int:
    stmts = list(A.walk_statements(fn.body))
    return max((s.line for s in stmts), default=fn.line)


def extremal_labels(cfg: Cfg) -> frozenset[int]:
    """Nodes without an inbound forward edge.

    A loop at the very start of a function has only its back edge coming
    in; that edge is ignored so the entry stays a singleton.
    """
    if not cfg.nodes:
        raise EmptyFunction("function has no nodes")
    targets = {e.dst for e in cfg.edges if e.kind != "Back"}
    ext = frozenset(label for label in cfg.nodes if label not in targets)
    if not ext:
        raise EmptyFunction("no node without inbound edges")
    return ext


def back_edges(cfg: Cfg) -> set[tuple[int, int]]:
    """Edges closing a cycle in a depth-first search from the entry."""
    found: set[tuple[int, int]] = set()
    state: dict[int, int] = {}
    for root in sorted(extremal_labels(cfg)):
        if root in state:
            continue
        state[root] = 1
        stack = [(root, iter(sorted(cfg.succs(root), key=lambda e: e.dst)))]
        while stack:
            label, it = stack[-1]
            edge = next(it, None)
            if edge is None:
                state[label] = 2
                stack.pop()
                continue
            seen = state.get(edge.dst)
            if seen == 1:
                found.add(edge.pair)
            elif seen is None:
                state[edge.dst] = 1
                stack.append((edge.dst, iter(sorted(cfg.succs(edge.dst), key=lambda e: e.dst))))
    return found


def written_root(instr: IrInstr, lowered: LoweredFunction) -> Optional[str]:
    """Non-temporary variable whose value ``instr`` changes, if any."""
    if instr.kind == "ASSIGN":
        name = instr.dest.name
    elif instr.kind in ("INDEX_WRITE", "MEMBER_WRITE"):
        base = instr.operands[0].name
        name = lowered.ref_roots.get(base, base)
    else:
        return None
    origin = lowered.symbols[name].origin
    return None if origin in ("temporary", "reference") else name


def _assign_versions(cfg: Cfg) -> None:
    """Static SSA numbering.

    Every write gets a fresh version.  Loop heads take a phi version for
    each variable written inside the loop; other joins take one for each
    variable whose incoming versions differ.  Forward edges always go to a
    higher label, so a single pass in label order suffices.
    """
    lowered = cfg.lowered
    counter: dict[str, int] = defaultdict(int)
    out: dict[int, dict[str, int]] = {}
    assigned_in_loop = {
        head: {r for label in region for i in cfg.nodes[label].instrs
               if (r := written_root(i, lowered)) is not None}
        for head, region in cfg.loop_regions.items()}
    for label in cfg.labels:
        incoming = [out[e.src] for e in cfg.preds(label) if e.kind != "Back" and e.src in out]
        versions: dict[str, int] = {}
        phis: dict[str, int] = {}
        names = set().union(*incoming) if incoming else set()
        for name in sorted(names):
            seen = {inc.get(name, 0) for inc in incoming}
            if len(seen) == 1:
                versions[name] = seen.pop()
            else:
                counter[name] += 1
                phis[name] = counter[name]
        for name in sorted(assigned_in_loop.get(label, ())):
            if name not in phis:
                counter[name] += 1
                phis[name] = counter[name]
        versions.update(phis)
        if phis:
            cfg.phis[label] = phis
        node = cfg.nodes[label]
        for idx, instr in enumerate(node.instrs):
            root = written_root(instr, lowered)
            if root is not None:
                counter[root] += 1
                versions[root] = counter[root]
                node.instrs[idx] = dataclasses.replace(instr, version=counter[root])
        out[label] = versions
