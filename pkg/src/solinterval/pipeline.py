"""End-to-end analysis of one function."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from .cfg import Cfg, build_cfg
from .detectors import Finding, all_findings
from .engine import DataflowSystem, SolveResult
from .frontend import ast as A
from .frontend import check_types, parse_source
from .ir import LoweredFunction, lower_contract
from .report import ReportDocument, build_document
from .solver import Verdict, backend_chain, classify_reachability, emit_smtlib


class AnalysisError(Exception):
    """Selection failure: unknown contract or function."""


@dataclass
class Analysis:
    contract: A.ContractAst
    lowered: LoweredFunction
    cfg: Cfg
    solve: SolveResult
    verdicts: dict[int, Verdict]
    findings: list[Finding]
    document: ReportDocument

    @property
    def entries(self):
        return self.solve.entries

    def smt_scripts(self) -> dict[int, str]:
        return {label: emit_smtlib(v.query) for label, v in self.verdicts.items()
                if v.query is not None}


def select_contract(contracts: list[A.ContractAst], name: str) -> A.ContractAst:
    """Free functions live in a nameless container, selected with ``""``."""
    for c in contracts:
        if c.name == name:
            return c
    known = ", ".join(repr(c.name) for c in contracts)
    raise AnalysisError(f"no contract named {name!r} (found {known})")


def analyze_contract(contract: A.ContractAst, function: str, backends=None) -> Analysis:
    typed = check_types(contract)
    lowered_all = lower_contract(typed)
    if function not in lowered_all:
        raise AnalysisError(f"contract {contract.name!r} has no function {function!r}")
    lowered = lowered_all[function]
    cfg = build_cfg(lowered)
    solved = DataflowSystem(cfg).solve()
    verdicts = classify_reachability(solved.entries, cfg,
                                     backends if backends is not None else backend_chain())
    findings = all_findings(cfg, solved.entries, verdicts)
    name = f"{contract.name}.{function}" if contract.name else function
    doc = build_document(name, cfg, solved.entries, verdicts, findings)
    return Analysis(typed, lowered, cfg, solved, verdicts, findings, doc)


def analyze_source(source: str, contract: str, function: str, backends=None) -> Analysis:
    return analyze_contract(select_contract(parse_source(source), contract), function, backends)


def analyze_file(path, contract: str, function: str, backends=None) -> Analysis:
    return analyze_source(Path(path).read_text(), contract, function, backends)
