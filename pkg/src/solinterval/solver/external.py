"""SMT-LIB2 solver run as a subprocess."""

from __future__ import annotations

import shlex
import subprocess

from .query import SatQuery
from .result import SatResult
from .smtlib import emit_smtlib

DEFAULT_TIMEOUT_MS = 5000


def run_script(script: str, command: str, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> SatResult:
    try:
        proc = subprocess.run(shlex.split(command), input=script, capture_output=True,
                              text=True, timeout=timeout_ms / 1000)
    except FileNotFoundError as exc:
        return SatResult.unknown(f"ProcessError: {exc}", backend="external")
    except subprocess.TimeoutExpired:
        return SatResult.unknown(f"ProcessError: timed out after {timeout_ms} ms", backend="external")
    except OSError as exc:
        return SatResult.unknown(f"ProcessError: {exc}", backend="external")
    lines = proc.stdout.strip().splitlines()
    first = lines[0].strip() if lines else ""
    if first == "sat":
        return SatResult.sat("solver answered sat", backend="external")
    if first == "unsat":
        return SatResult.unsat("solver answered unsat", backend="external")
    stderr = proc.stderr.strip().splitlines()
    detail = first or (stderr[0] if stderr else "nothing")
    return SatResult.unknown(f"solver answered {detail} (exit {proc.returncode})",
                             backend="external")


def decide_external(q: SatQuery, command: str, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> SatResult:
    return run_script(emit_smtlib(q), command, timeout_ms)
