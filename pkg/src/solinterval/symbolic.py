"""Versioned symbols and the small expression language used by constraints."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from .domain import tdiv, tmod

_VERSION = re.compile(r"@\d+")


def strip_versions(text: str) -> str:
    return _VERSION.sub("", text)


@dataclass(frozen=True, order=True)
class VarId:
    """A versioned variable or composite cell.

    ``path`` holds already-rendered access segments such as ``"[msg.sender]"``
    or ``".balance"``; key expressions inside it carry their own versions.
    """

    name: str
    version: int = 0
    origin: str = "local"
    path: tuple[str, ...] = ()

    @property
    def smt_name(self) -> str:
        base = f"{self.name}@{self.version}" if self.version > 0 else self.name
        return base + "".join(self.path)

    @property
    def display(self) -> str:
        return strip_versions(self.smt_name)

    def __str__(self) -> str:
        return self.smt_name


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: Union[int, bool]


@dataclass(frozen=True)
class Ref(Expr):
    var: VarId
    sort: str = "int"          # "int" | "bool"
    unsigned: bool = False


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


def render(e: Expr, versioned: bool = False, parent: int = 0, right: bool = False) -> str:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Ref):
        return e.var.smt_name if versioned else e.var.display
    if isinstance(e, Not):
        return "!" + render(e.operand, versioned, 7)
    if isinstance(e, Neg):
        return "-" + render(e.operand, versioned, 7)
    prec = _PREC[e.op]
    text = f"{render(e.left, versioned, prec)} {e.op} {render(e.right, versioned, prec, True)}"
    if prec < parent or (right and prec == parent):
        return f"({text})"
    return text


def variables(e: Expr) -> set[VarId]:
    if isinstance(e, Ref):
        return {e.var}
    if isinstance(e, (Not, Neg)):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    return set()


def refs(e: Expr) -> dict[VarId, Ref]:
    if isinstance(e, Ref):
        return {e.var: e}
    if isinstance(e, (Not, Neg)):
        return refs(e.operand)
    if isinstance(e, BinOp):
        return {**refs(e.left), **refs(e.right)}
    return {}


class EvalError(Exception):
    """Concrete evaluation failed (division by zero)."""


def evaluate(e: Expr, env: Mapping[VarId, Union[int, bool]]):
    """Exact evaluation with Solidity's truncating division."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Ref):
        return env[e.var]
    if isinstance(e, Not):
        return not evaluate(e.operand, env)
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    a = evaluate(e.left, env)
    if e.op == "&&":
        return bool(a) and bool(evaluate(e.right, env))
    if e.op == "||":
        return bool(a) or bool(evaluate(e.right, env))
    b = evaluate(e.right, env)
    op = e.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op in ("/", "%"):
        if b == 0:
            raise EvalError("division by zero")
        return tdiv(a, b) if op == "/" else tmod(a, b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    raise ValueError(f"unknown operator {op}")
