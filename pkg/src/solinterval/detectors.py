"""Automatic findings derived from reachability verdicts and intervals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .cfg import Cfg
from .engine import AnalysisInfo, constraint_order, execute_node
from .solver import REACHABLE, UNREACHABLE, Verdict, encode_state, tighten

ERROR = "Error"
WARNING = "Warning"


@dataclass(frozen=True)
class Finding:
    kind: str
    label: int
    line: int
    severity: str
    message: str
    evidence: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {"kind": self.kind, "label": self.label, "line": self.line,
                "severity": self.severity, "message": self.message,
                "evidence": list(self.evidence)}

    def __str__(self) -> str:
        text = f"[{self.severity}] {self.kind} at node {self.label} (line {self.line}): {self.message}"
        if self.evidence:
            text += " | evidence: " + "; ".join(self.evidence)
        return text


def _regions(labels: set[int], cfg: Cfg) -> list[set[int]]:
    adj: dict[int, set[int]] = {label: set() for label in labels}
    for e in cfg.edges:
        if e.src in labels and e.dst in labels:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    regions, seen = [], set()
    for start in sorted(labels):
        if start in seen:
            continue
        comp, stack = set(), [start]
        while stack:
            label = stack.pop()
            if label in comp:
                continue
            comp.add(label)
            stack.extend(adj[label] - comp)
        seen |= comp
        regions.append(comp)
    return regions


def detect_unreachable(verdicts: Mapping[int, Verdict], cfg: Cfg,
                       entries: Mapping[int, AnalysisInfo]) -> list[Finding]:
    """One Error per connected region of unreachable nodes, at its first label."""
    dead = {label for label, v in verdicts.items() if v.reachability == UNREACHABLE}
    findings = []
    for region in _regions(dead, cfg):
        first = min(region)
        node = cfg.nodes[first]
        info = entries.get(first)
        if info is None:
            evidence = ("no feasible path reaches this node",)
        else:
            evidence = tuple(c.text for c in sorted(info.con, key=constraint_order))
        where = "the function end-point" if node.kind == "END_FUNCTION" else f"'{node.header}'"
        msg = f"{where} can never execute"
        if len(region) > 1:
            msg += f" (with nodes {', '.join(str(x) for x in sorted(region - {first}))})"
        findings.append(Finding("UnreachableCode", first, node.line, ERROR, msg, evidence))
    return findings


def _replay_events(cfg: Cfg, entries: Mapping[int, AnalysisInfo],
                   verdicts: Mapping[int, Verdict], kind: str):
    for label in cfg.labels:
        info = entries.get(label)
        verdict = verdicts.get(label)
        if info is None or (verdict is not None and verdict.reachability == UNREACHABLE):
            continue
        q = verdict.query if verdict is not None and verdict.query is not None else encode_state(info, cfg)
        bounds = tighten(q)
        if bounds is None:
            continue
        _, events = execute_node(cfg, label, info, refine=bounds.get)
        for ev in events:
            if ev.kind == kind:
                yield ev


def detect_division_hazards(cfg: Cfg, entries: Mapping[int, AnalysisInfo],
                            verdicts: Mapping[int, Verdict]) -> list[Finding]:
    """Warning for each division or modulo whose divisor interval contains 0."""
    return [
        Finding("DivisionByZeroPossible", ev.label, ev.line, WARNING,
                f"divisor {ev.detail} may be zero", (f"{ev.detail} in {ev.interval}",))
        for ev in _replay_events(cfg, entries, verdicts, "division")
    ]


def detect_oob_hazards(cfg: Cfg, entries: Mapping[int, AnalysisInfo],
                       verdicts: Mapping[int, Verdict]) -> list[Finding]:
    """Warning for each fixed-array access whose index may leave the bounds."""
    return [
        Finding("ArrayIndexOutOfBoundsPossible", ev.label, ev.line, WARNING,
                f"index of {ev.detail} may be out of bounds", (f"index in {ev.interval}",))
        for ev in _replay_events(cfg, entries, verdicts, "index")
    ]


def all_findings(cfg: Cfg, entries, verdicts) -> list[Finding]:
    found = detect_unreachable(verdicts, cfg, entries)
    found += detect_division_hazards(cfg, entries, verdicts)
    found += detect_oob_hazards(cfg, entries, verdicts)
    return sorted(found, key=lambda f: (f.label, f.severity != ERROR, f.kind))


__all__ = ["Finding", "ERROR", "WARNING", "REACHABLE", "detect_unreachable",
           "detect_division_hazards", "detect_oob_hazards", "all_findings"]
