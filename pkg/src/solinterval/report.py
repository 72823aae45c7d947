"""State dumps in text and JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .cfg import Cfg
from .detectors import Finding
from .domain import BoolApprox, CompositeValue
from .engine import AnalysisInfo, constraint_order
from .frontend import ast as A
from .symbolic import render


@dataclass(frozen=True)
class NumericEntry:
    name: str
    type: str
    value: str

    @property
    def text(self) -> str:
        if self.type == "composite":
            return f"{self.name}: {self.value}"
        return f"{self.name} {self.type} {self.value}"


@dataclass(frozen=True)
class BooleanEntry:
    name: str
    expression: str
    flag: str = ""

    @property
    def text(self) -> str:
        return " ".join(p for p in (self.name, "bool", self.expression, self.flag) if p)


@dataclass(frozen=True)
class ConstraintEntry:
    symbol: str
    polarity: bool
    text: str


@dataclass
class NodeSection:
    label: int
    kind: str
    source: str
    numeric: list[NumericEntry] = field(default_factory=list)
    boolean: list[BooleanEntry] = field(default_factory=list)
    constraints: list[ConstraintEntry] = field(default_factory=list)
    reachability: str = ""

    @property
    def header(self) -> str:
        return f"Node {self.label}:{self.kind} {self.source}".rstrip()


@dataclass
class ReportDocument:
    function: str
    nodes: list[NodeSection]
    findings: list[Finding]

    @property
    def reachability(self) -> dict[int, str]:
        return {n.label: n.reachability for n in self.nodes}


def _type_text(t: A.MiniSolType) -> str:
    if isinstance(t, (A.UIntType, A.AddressType)):
        return "uint"
    if isinstance(t, A.IntType):
        return "int"
    return str(t)


def node_section(cfg: Cfg, label: int, info: Optional[AnalysisInfo],
                 reachability: str = "") -> NodeSection:
    node = cfg.nodes[label]
    section = NodeSection(label, node.kind, node.source, reachability=reachability)
    if info is None:
        return section
    symbols = cfg.symbols
    for name, sym in symbols.items():
        if sym.origin in ("temporary", "reference") or name not in info.vals:
            continue
        value = info.vals[name]
        if isinstance(value, BoolApprox):
            section.boolean.append(BooleanEntry(name, str(value)))
        elif isinstance(value, CompositeValue):
            section.numeric.append(NumericEntry(name, "composite", str(value)))
        else:
            section.numeric.append(NumericEntry(name, _type_text(sym.type), str(value)))
    exprs = dict(info.exprs)
    for c in info.con:
        exprs.setdefault(c.symbol.name, c.expr)
    flagged = sorted(info.flags, key=lambda n: int(n.split("_")[1]) if n.startswith("TMP_") else 0)
    for name in flagged:
        e = exprs.get(name)
        text = render(e) if e is not None else str(info.vals.get(name, BoolApprox.UNKNOWN))
        section.boolean.append(BooleanEntry(name, text, info.flags[name]))
    for c in sorted(info.con, key=constraint_order):
        section.constraints.append(ConstraintEntry(c.symbol.name, c.polarity, c.text))
    return section


def build_document(name: str, cfg: Cfg, entries, verdicts, findings) -> ReportDocument:
    nodes = [node_section(cfg, label, entries.get(label),
                          verdicts[label].reachability if label in verdicts else "")
             for label in cfg.labels]
    return ReportDocument(name, nodes, list(findings))


def _block(title: str, items: list[str]) -> list[str]:
    if not items:
        return [f"{title}: {{", "},"]
    lines = [f"{title}: {{{items[0]}"]
    lines += [f", {item}" for item in items[1:]]
    lines.append("},")
    return lines


def render_node_state(section: NodeSection) -> str:
    numeric = [f"'{e.name}': {e.text}" for e in section.numeric]
    boolean = [f"'{e.name}': {e.text}" for e in section.boolean]
    pairs = ", ".join(f"('{c.symbol}', {c.polarity})" for c in section.constraints)
    lines = [section.header, "{"]
    lines += _block("Numeric variables", numeric)
    lines += _block("Booleans variables", boolean)
    lines.append(f"Constraints: [{pairs}]")
    lines.append("}")
    return "\n".join(lines)


def render_text(doc: ReportDocument) -> str:
    parts = [f"Function: {doc.function}", ""]
    for section in doc.nodes:
        parts.append(render_node_state(section))
        parts.append("")
    parts.append("Reachability:")
    parts += [f"Node {n.label}: {n.reachability}" for n in doc.nodes]
    parts.append("")
    parts.append("Findings:")
    parts += [str(f) for f in doc.findings] or ["none"]
    return "\n".join(parts) + "\n"


def to_json_obj(doc: ReportDocument) -> dict:
    return {
        "function": doc.function,
        "nodes": [
            {
                "label": n.label,
                "kind": n.kind,
                "source": n.source,
                "numeric": {e.name: {"type": e.type, "value": e.value} for e in n.numeric},
                "boolean": {e.name: {"expression": e.expression, "flag": e.flag} for e in n.boolean},
                "constraints": [{"symbol": c.symbol, "polarity": c.polarity, "text": c.text}
                                for c in n.constraints],
                "reachability": n.reachability,
            }
            for n in doc.nodes
        ],
        "findings": [f.as_dict() for f in doc.findings],
    }


def render_json(doc: ReportDocument) -> str:
    return json.dumps(to_json_obj(doc), indent=2) + "\n"
