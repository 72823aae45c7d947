from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

SAT = "Sat"
UNSAT = "Unsat"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class SatResult:
    status: str
    diagnostic: str = ""
    backend: str = ""
    model: Optional[dict] = field(default=None, compare=False)

    @staticmethod
    def sat(diagnostic: str = "", backend: str = "", model=None) -> "SatResult":
        return SatResult(SAT, diagnostic, backend, model)

    @staticmethod
    def unsat(diagnostic: str = "", backend: str = "") -> "SatResult":
        return SatResult(UNSAT, diagnostic, backend)

    @staticmethod
    def unknown(diagnostic: str = "", backend: str = "") -> "SatResult":
        return SatResult(UNKNOWN, diagnostic, backend)

    @property
    def definitive(self) -> bool:
        return self.status != UNKNOWN
