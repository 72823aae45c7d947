"""Self-contained decision procedure for conjunctions of linear comparisons.

Bounds are propagated over the linear atoms until nothing changes.  An
emptied interval proves Unsat.  Otherwise a small candidate search looks
for a witness that satisfies every assertion exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

from ..domain import NEG_INF, NON_NEGATIVE, POS_INF, TOP, Interval, iv_meet
from ..symbolic import BinOp, Const, EvalError, Expr, Neg, Not, Ref, VarId, evaluate
from .query import SatQuery
from .result import SatResult

MAX_ROUNDS = 64
MAX_CANDIDATES = 20000

_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


class _Unsupported(Exception):
    pass


@dataclass(frozen=True)
class Linear:
    """sum(coef * var) + const"""

    coefs: tuple[tuple[VarId, int], ...]
    const: int

    @staticmethod
    def of(coefs: dict, const: int) -> "Linear":
        return Linear(tuple(sorted(((v, c) for v, c in coefs.items() if c != 0),
                                   key=lambda vc: vc[0].smt_name)), const)


def linearize(e: Expr) -> Linear:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            raise _Unsupported("boolean in arithmetic")
        return Linear((), e.value)
    if isinstance(e, Ref):
        if e.sort != "int":
            raise _Unsupported("boolean variable")
        return Linear(((e.var, 1),), 0)
    if isinstance(e, Neg):
        return _scale(linearize(e.operand), -1)
    if isinstance(e, BinOp) and e.op in ("+", "-"):
        a, b = linearize(e.left), linearize(e.right)
        return _add(a, b if e.op == "+" else _scale(b, -1))
    if isinstance(e, BinOp) and e.op == "*":
        a, b = linearize(e.left), linearize(e.right)
        if not a.coefs:
            return _scale(b, a.const)
        if not b.coefs:
            return _scale(a, b.const)
    raise _Unsupported("nonlinear term")


def _scale(a: Linear, k: int) -> Linear:
    return Linear.of({v: c * k for v, c in a.coefs}, a.const * k)


def _add(a: Linear, b: Linear) -> Linear:
    coefs = dict(a.coefs)
    for v, c in b.coefs:
        coefs[v] = coefs.get(v, 0) + c
    return Linear.of(coefs, a.const + b.const)


@dataclass(frozen=True)
class Atom:
    """``lin op 0`` with op one of <=, ==, !=."""

    lin: Linear
    op: str


def _atoms(e: Expr, polarity: bool) -> list[Atom]:
    if isinstance(e, Const) and isinstance(e.value, bool):
        return [] if e.value == polarity else [Atom(Linear((), 1), "<=")]
    if isinstance(e, Not):
        return _atoms(e.operand, not polarity)
    if isinstance(e, BinOp):
        if e.op == "&&" and polarity or e.op == "||" and not polarity:
            return _atoms(e.left, polarity) + _atoms(e.right, polarity)
        if e.op in _FLIP:
            op = e.op if polarity else _FLIP[e.op]
            diff = _add(linearize(e.left), _scale(linearize(e.right), -1))
            if op == "<=":
                return [Atom(diff, "<=")]
            if op == "<":
                return [Atom(_add(diff, Linear((), 1)), "<=")]
            if op == ">=":
                return [Atom(_scale(diff, -1), "<=")]
            if op == ">":
                return [Atom(_add(_scale(diff, -1), Linear((), 1)), "<=")]
            return [Atom(diff, "==" if op == "==" else "!=")]
    raise _Unsupported("unsupported assertion")


# -- extended-integer helpers --------------------------------------------------

def _mul(c: int, b) -> float | int:
    if b == 0 or c == 0:
        return 0
    if isinstance(b, float):
        return b if c > 0 else -b
    return c * b


def _term_range(c: int, iv: Interval) -> tuple:
    lo, hi = _mul(c, iv.lo), _mul(c, iv.hi)
    return (lo, hi) if lo <= hi else (hi, lo)


def _floor_div(a, c: int):
    if isinstance(a, float):
        return a if c > 0 else -a
    return a // c


def _ceil_div(a, c: int):
    if isinstance(a, float):
        return a if c > 0 else -a
    return -((-a) // c)


def _sum(values) -> float | int:
    total = 0
    for v in values:
        if isinstance(v, float):
            return v
        total += v
    return total


def _propagate_le(lin: Linear, env: dict[VarId, Interval]) -> bool:
    """Tighten for ``lin <= 0``; returns True on change."""
    changed = False
    mins = {v: _term_range(c, env[v])[0] for v, c in lin.coefs}
    for v, c in lin.coefs:
        others = [mins[w] for w, _ in lin.coefs if w != v]
        lowest = _sum(others + [lin.const])
        if lowest == POS_INF:
            env[v] = Interval()
            return True
        if lowest == NEG_INF:
            continue
        rhs = -lowest           # c * v <= rhs
        cur = env[v]
        if c > 0:
            new = iv_meet(cur, Interval(NEG_INF, _floor_div(rhs, c)))
        else:
            new = iv_meet(cur, Interval(_ceil_div(rhs, c), POS_INF))
        if new != cur:
            env[v] = new
            changed = True
            if new.empty:
                return True
    return changed


def _propagate_ne(lin: Linear, env: dict[VarId, Interval]) -> bool:
    if len(lin.coefs) != 1:
        return False
    (v, c), = lin.coefs
    if lin.const % c != 0:
        return False
    banned = -lin.const // c
    cur = env[v]
    new = cur
    if cur.lo == banned:
        new = Interval.of(cur.lo + 1, cur.hi)
    elif cur.hi == banned:
        new = Interval.of(cur.lo, cur.hi - 1)
    if new != cur:
        env[v] = new
        return True
    return False


def _const_holds(atom: Atom) -> bool:
    k = atom.lin.const
    return {"<=": k <= 0, "==": k == 0, "!=": k != 0}[atom.op]


@dataclass
class _Problem:
    env: dict[VarId, Interval]
    atoms: list[Atom]
    unsupported: list[str]
    unsigned: set[VarId]


def _build(q: SatQuery) -> _Problem:
    env: dict[VarId, Interval] = {}
    unsigned = set()
    unsupported: list[str] = []
    for d in q.declarations:
        if d.sort == "int":
            env[d.var] = NON_NEGATIVE if d.unsigned else TOP
            if d.unsigned:
                unsigned.add(d.var)
    for var, iv in q.bounds:
        env[var] = iv_meet(env.get(var, TOP), iv)
    atoms: list[Atom] = []
    for var, e in q.equations:
        try:
            atoms.append(Atom(_add(linearize(Ref(var)), _scale(linearize(e), -1)), "=="))
        except _Unsupported as exc:
            unsupported.append(f"{var.smt_name}: {exc}")
    for sym, polarity in q.assertions:
        e = q.definition(sym)
        if e is None:
            unsupported.append(f"{sym.smt_name}: no definition")
            continue
        try:
            atoms.extend(_atoms(e, polarity))
        except _Unsupported as exc:
            unsupported.append(f"{sym.smt_name}: {exc}")
    for a in atoms:
        for v, _ in a.lin.coefs:
            env.setdefault(v, TOP)
    return _Problem(env, atoms, unsupported, unsigned)


def _run(p: _Problem) -> Optional[str]:
    """Propagate to a fixpoint (or the round cap); returns a reason on Unsat."""
    for var, iv in p.env.items():
        if iv.empty:
            return f"{var.display} has an empty interval"
    for _ in range(MAX_ROUNDS):
        changed = False
        for a in p.atoms:
            if not a.lin.coefs:
                if not _const_holds(a):
                    return "constant assertion is false"
                continue
            if a.op in ("<=", "=="):
                changed |= _propagate_le(a.lin, p.env)
            if a.op == "==":
                changed |= _propagate_le(_scale(a.lin, -1), p.env)
            if a.op == "!=":
                changed |= _propagate_ne(a.lin, p.env)
            for v, _ in a.lin.coefs:
                if p.env[v].empty:
                    return f"{v.display} has no feasible value"
        if not changed:
            break
    return None


def tighten(q: SatQuery) -> Optional[dict[VarId, Interval]]:
    """Intervals implied by the linear part of ``q``; None if it is Unsat."""
    p = _build(q)
    if _run(p) is not None:
        return None
    return dict(p.env)


def _candidates(iv: Interval) -> list[int]:
    lo = iv.lo if iv.lo != NEG_INF else (min(0, iv.hi) if iv.hi != POS_INF else 0) - 16
    hi = iv.hi if iv.hi != POS_INF else max(lo, 0) + 16
    picks = [lo, hi, lo + 1, hi - 1, 0, 1, (lo + hi) // 2, lo + 2, lo + 3, lo + 10]
    out = []
    for x in picks:
        x = int(x)
        if lo <= x <= hi and x not in out:
            out.append(x)
    return out


def _witness(q: SatQuery, p: _Problem) -> Optional[dict[VarId, int]]:
    defined = {var: e for var, e in q.equations}
    free = [v for v in sorted(p.env, key=lambda v: v.smt_name) if v not in defined]
    pools = [_candidates(p.env[v]) for v in free]
    per_var = 10
    while per_var > 1 and math.prod(min(len(x), per_var) for x in pools) > MAX_CANDIDATES:
        per_var -= 1
    pools = [x[:per_var] for x in pools]
    checks = [(q.definition(s), pol) for s, pol in q.assertions]
    for combo in itertools.product(*pools):
        env = dict(zip(free, combo))
        try:
            pending = dict(defined)
            while pending:
                progress = False
                for var, e in list(pending.items()):
                    try:
                        env[var] = evaluate(e, env)
                    except KeyError:
                        continue
                    del pending[var]
                    progress = True
                if not progress:
                    break
            if pending:
                return None
            if any(env[v] not in iv for v, iv in q.bounds):
                continue
            if any(env[v] < 0 for v in p.unsigned):
                continue
            if all(bool(evaluate(e, env)) == pol for e, pol in checks):
                return env
        except EvalError:
            continue
    return None


def decide_builtin(q: SatQuery) -> SatResult:
    p = _build(q)
    reason = _run(p)
    if reason is not None:
        return SatResult.unsat(f"bounds propagation: {reason}", backend="builtin")
    if p.unsupported:
        return SatResult.unknown("outside the linear fragment: " + "; ".join(p.unsupported),
                                 backend="builtin")
    model = _witness(q, p)
    if model is None:
        return SatResult.unknown("no witness found among candidates", backend="builtin")
    shown = ", ".join(f"{v.display}={x}" for v, x in sorted(model.items(), key=lambda kv: kv[0].smt_name))
    return SatResult.sat(f"witness {shown}" if shown else "no constraints",
                         backend="builtin", model=model)
