"""Satisfiability of node states and the reachability verdicts built on it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Protocol

from ..cfg import Cfg
from ..engine import AnalysisInfo
from .builtin import decide_builtin, tighten
from .external import DEFAULT_TIMEOUT_MS, decide_external
from .query import Decl, EncodeError, SatQuery, encode_state
from .result import SAT, UNKNOWN, UNSAT, SatResult
from .smtlib import emit_smtlib

REACHABLE = "Reachable"
UNREACHABLE = "Unreachable"
UNKNOWN_REACH = "Unknown"


class SolverBackend(Protocol):
    name: str

    def decide(self, q: SatQuery) -> SatResult: ...


class BuiltinBackend:
    name = "builtin"

    def decide(self, q: SatQuery) -> SatResult:
        return decide_builtin(q)


class ExternalSmtBackend:
    name = "external"

    def __init__(self, command: str, timeout_ms: int = DEFAULT_TIMEOUT_MS):
        self.command = command
        self.timeout_ms = timeout_ms

    def decide(self, q: SatQuery) -> SatResult:
        return decide_external(q, self.command, self.timeout_ms)


def backend_chain(command: Optional[str] = None, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> list:
    chain: list = [BuiltinBackend()]
    if command:
        chain.append(ExternalSmtBackend(command, timeout_ms))
    return chain


@dataclass(frozen=True)
class Verdict:
    reachability: str
    result: Optional[SatResult]
    query: Optional[SatQuery]


def decide(q: SatQuery, backends) -> SatResult:
    """First definitive answer along the chain."""
    last = SatResult.unknown("no backend", backend="")
    for b in backends:
        last = b.decide(q)
        if last.definitive:
            return last
    return last


def classify_reachability(entries: Mapping[int, AnalysisInfo], cfg: Cfg,
                          backends) -> dict[int, Verdict]:
    verdicts: dict[int, Verdict] = {}
    for label in cfg.labels:
        info = entries.get(label)
        if info is None:
            verdicts[label] = Verdict(UNREACHABLE, None, None)
            continue
        q = encode_state(info, cfg)
        result = decide(q, backends)
        status = {SAT: REACHABLE, UNSAT: UNREACHABLE}.get(result.status, UNKNOWN_REACH)
        verdicts[label] = Verdict(status, result, q)
    return verdicts


__all__ = [
    "BuiltinBackend", "Decl", "EncodeError", "ExternalSmtBackend", "SatQuery", "SatResult",
    "SolverBackend", "Verdict", "backend_chain", "classify_reachability", "decide",
    "decide_builtin", "decide_external", "emit_smtlib", "encode_state", "tighten",
    "REACHABLE", "UNREACHABLE", "UNKNOWN_REACH", "SAT", "UNSAT", "UNKNOWN",
]
