"""Shared fixtures: corpus access, solver availability and a brute-force query checker."""

from __future__ import annotations

import functools
import itertools
import shutil
from pathlib import Path

from solinterval.pipeline import analyze_file
from solinterval.solver import backend_chain
from solinterval.symbolic import EvalError, evaluate

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

Z3_COMMAND = "z3 -in"
HAVE_Z3 = shutil.which("z3") is not None

# (file, contract, function, loop_free)
CORPUS_FUNCTIONS = [
    ("bid_contract.sol", "BidContract", "bid", True),
    ("deposit_contract.sol", "DepositContract", "deposit", True),
    ("deposit_contract.sol", "DepositContract", "withdraw", True),
    ("divide_by_zero_minimal.sol", "DivideByZeroMinimal", "divide", True),
    ("divide_by_zero_minimal.sol", "DivideByZeroMinimal", "divideChecked", True),
    ("divide_by_zero_minimal.sol", "DivideByZeroMinimal", "halve", True),
    ("division_by_zero_array.sol", "DivisionByZeroArray", "getSomeResult", True),
    ("division_by_zero_array.sol", "DivisionByZeroArray", "getAverage", True),
    ("improper_data_validation.sol", "ImproperDataValidation", "participate", True),
    ("out_of_bounds_array_minimal.sol", "OutOfBoundsArrayMinimal", "getArrayElement", True),
    ("out_of_bounds_array_minimal.sol", "OutOfBoundsArrayMinimal", "getArrayElementChecked", True),
    ("out_of_bounds_array_minimal.sol", "OutOfBoundsArrayMinimal", "getLast", True),
    ("branches.sol", "Branches", "classify", True),
    ("branches.sol", "Branches", "guarded", True),
    ("branches.sol", "Branches", "store", True),
    ("branches.sol", "Branches", "spend", True),
    ("magic_number.sol", "", "magicNumber", False),
    ("loops.sol", "Loops", "forever", False),
    ("loops.sol", "Loops", "twoLoops", False),
    ("loops.sol", "Loops", "nested", False),
    ("loops.sol", "Loops", "countdown", False),
]

LOOP_FREE = [c for c in CORPUS_FUNCTIONS if c[3]]


def corpus_path(name: str) -> Path:
    return CORPUS / name


@functools.lru_cache(maxsize=None)
def analyze(file: str, contract: str, function: str, external: bool = False):
    backends = backend_chain(Z3_COMMAND if external else None)
    return analyze_file(corpus_path(file), contract, function, backends)


def brute_force_models(q, lo: int = 0, hi: int = 15, limit: int = 200_000):
    """Yield assignments over lo..hi that satisfy every part of the query.

    Variables with an SSA equation are computed rather than enumerated.
    Raises ValueError when the search space exceeds ``limit``.
    """
    defined = {v for v, _ in q.equations}
    temps = {v for v, _ in q.definitions}
    free = [d for d in q.declarations if d.var not in defined and d.var not in temps]
    domains = [[False, True] if d.sort == "bool" else range(lo, hi + 1) for d in free]
    size = 1
    for dom in domains:
        size *= len(dom)
    if size > limit:
        raise ValueError(f"search space {size} too large")
    bounds = dict(q.bounds)
    for combo in itertools.product(*domains):
        env = {d.var: v for d, v in zip(free, combo)}
        try:
            pending = list(q.equations)
            while pending:
                progress = False
                for item in list(pending):
                    var, e = item
                    try:
                        env[var] = evaluate(e, env)
                    except KeyError:
                        continue
                    pending.remove(item)
                    progress = True
                if not progress:
                    raise EvalError("cyclic equations")
            for var, e in q.definitions:
                env[var] = bool(evaluate(e, env))
        except EvalError:
            continue
        if any(not isinstance(env[v], bool) and env[v] not in iv for v, iv in bounds.items()):
            continue
        if any(d.unsigned and env[d.var] < 0 for d in q.declarations):
            continue
        if all(bool(env[sym]) == pol for sym, pol in q.assertions):
            yield env


ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
