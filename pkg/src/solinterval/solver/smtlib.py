"""SMT-LIB2 rendering of queries."""

from __future__ import annotations

import re

from ..symbolic import BinOp, Const, Expr, Neg, Not, Ref, VarId
from .query import SatQuery

_SIMPLE = re.compile(r"^[A-Za-z~!$^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*$")
_RESERVED = {"true", "false", "not", "and", "or", "div", "mod", "abs", "ite", "let",
             "assert", "par", "_", "!", "as", "forall", "exists", "distinct"}

_CMP = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "="}


def symbol(var: VarId) -> str:
    name = var.smt_name
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def _nonneg(e: Expr) -> bool:
    if isinstance(e, Const):
        return not isinstance(e.value, bool) and e.value >= 0
    if isinstance(e, Ref):
        return e.unsigned
    if isinstance(e, BinOp) and e.op in ("+", "*", "/", "%"):
        return _nonneg(e.left) and _nonneg(e.right)
    return False


def term(e: Expr) -> str:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, Ref):
        return symbol(e.var)
    if isinstance(e, Not):
        return f"(not {term(e.operand)})"
    if isinstance(e, Neg):
        return f"(- {term(e.operand)})"
    a, b = term(e.left), term(e.right)
    op = e.op
    if op in ("+", "-", "*"):
        return f"({op} {a} {b})"
    if op in ("/", "%"):
        if _nonneg(e.left) and _nonneg(e.right):
            return f"({'div' if op == '/' else 'mod'} {a} {b})"
        # truncation toward zero for signed operands
        q = f"(ite (= (>= {a} 0) (> {b} 0)) (div (abs {a}) (abs {b})) (- (div (abs {a}) (abs {b}))))"
        return q if op == "/" else f"(- {a} (* {b} {q}))"
    if op == "&&":
        return f"(and {a} {b})"
    if op == "||":
        return f"(or {a} {b})"
    if op == "!=":
        return f"(not (= {a} {b}))"
    return f"({_CMP[op]} {a} {b})"


def emit_smtlib(q: SatQuery) -> str:
    lines = ["(set-logic QF_NIA)"]
    for d in q.declarations:
        lines.append(f"(declare-const {symbol(d.var)} {'Bool' if d.sort == 'bool' else 'Int'})")
    bounded_below = {v for v, iv in q.bounds if not iv.empty and iv.lo != float("-inf") and iv.lo >= 0}
    for d in q.declarations:
        if d.unsigned and d.var not in bounded_below:
            lines.append(f"(assert (>= {symbol(d.var)} 0))")
    for var, iv in q.bounds:
        if iv.empty:
            lines.append("(assert false)")
            continue
        if iv.lo != float("-inf"):
            lines.append(f"(assert (>= {symbol(var)} {term(Const(int(iv.lo)))}))")
        if iv.hi != float("inf"):
            lines.append(f"(assert (<= {symbol(var)} {term(Const(int(iv.hi)))}))")
    for var, e in q.equations:
        lines.append(f"(assert (= {symbol(var)} {term(e)}))")
    for sym, polarity in q.assertions:
        e = q.definition(sym)
        body = term(e) if e is not None else symbol(sym)
        lines.append(f"(assert {body})" if polarity else f"(assert (not {body}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
