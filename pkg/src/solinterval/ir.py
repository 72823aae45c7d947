"""Three-address lowering of typed functions.

One statement becomes one block of instructions.  Comparison and
arithmetic results land in ``TMP_k`` temporaries and element or member
reads in ``REF_k`` path aliases.  Both counters run across the whole
contract, so the temporaries of a function depend on the functions
declared before it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from .frontend import ast as A
from .frontend.checker import BUILTIN_VARS, builtin_name
from .frontend.printer import expr_text

INSTR_KINDS = (
    "ASSIGN", "BINOP", "UNOP", "INDEX_READ", "INDEX_WRITE", "MEMBER_READ",
    "MEMBER_WRITE", "CONDITION", "REQUIRE", "ASSERT", "REVERT", "RETURN",
    "BUILTIN_CALL", "NOP",
)


class LoweringError(Exception):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Lit:
    """A literal.  ``None`` stands for the zero value of the destination."""

    value: Union[int, bool, str, None]

    def __str__(self) -> str:
        if self.value is None:
            return "<zero>"
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        if isinstance(self.value, str):
            return f'"{self.value}"'
        return str(self.value)


Operand = Union[Var, Lit]


@dataclass(frozen=True)
class IrInstr:
    kind: str
    dest: Optional[Var] = None
    operands: tuple[Operand, ...] = ()
    line: int = 0
    op: Optional[str] = None
    # SSA version given to the written root variable; set by build_cfg
    version: int = 0

    def __str__(self) -> str:
        args = ", ".join(str(o) for o in self.operands)
        if self.kind == "BINOP":
            rhs = f"{self.operands[0]} {self.op} {self.operands[1]}"
        elif self.kind == "UNOP":
            rhs = f"{self.op}{self.operands[0]}"
        elif self.kind == "ASSIGN":
            rhs = args
        elif self.kind == "INDEX_READ":
            rhs = f"{self.operands[0]}[{self.operands[1]}]"
        elif self.kind == "MEMBER_READ":
            rhs = f"{self.operands[0]}.{self.op}"
        elif self.kind == "INDEX_WRITE":
            return f"{self.operands[0]}[{self.operands[1]}] := {self.operands[2]}"
        elif self.kind == "MEMBER_WRITE":
            return f"{self.operands[0]}.{self.op} := {self.operands[1]}"
        elif self.kind == "BUILTIN_CALL":
            rhs = f"{self.op}({args})"
        else:
            return f"{self.kind} {args}".rstrip()
        if self.dest is None:
            return rhs
        suffix = f".{self.version}" if self.version else ""
        return f"{self.dest}{suffix} := {rhs}"


@dataclass(frozen=True)
class Symbol:
    name: str
    type: A.MiniSolType
    origin: str          # parameter | local | state | builtin | temporary | reference


@dataclass
class StmtBlock:
    stmt: Optional[A.Stmt]
    kind: str            # NEW VARIABLE | EXPRESSION | IF | IF_LOOP | RETURN | END_FUNCTION
    source: str
    line: int
    instrs: list[IrInstr] = field(default_factory=list)


@dataclass
class LoweredFunction:
    contract: A.ContractAst
    function: A.FunctionAst
    blocks: list[tuple[int, StmtBlock]]
    symbols: dict[str, Symbol]
    # REF_k -> root variable whose storage it aliases
    ref_roots: dict[str, str]
    # named return variables start at their zero value, other locals at bottom
    zero_init: set[str]

    def label_of(self, stmt: A.Stmt) -> int:
        for label, block in self.blocks:
            if block.stmt is stmt:
                return label
        raise KeyError(stmt)


class _Counters:
    def __init__(self):
        self.tmp = itertools.count()
        self.ref = itertools.count()


_CONVERSIONS = {"payable", "address", "uint", "int"} | {
    f"{p}{b}" for p in ("uint", "int") for b in range(8, 257, 8)}


def stmt_header(s: A.Stmt) -> tuple[str, str]:
    """Node kind and source text as shown in state dumps."""
    if isinstance(s, A.VarDecl):
        text = f"{s.var_type} {s.name}" if s.init is None else f"{s.name} = {expr_text(s.init)}"
        return "NEW VARIABLE", text
    if isinstance(s, A.Assign):
        return "EXPRESSION", f"{expr_text(s.target)} {s.op} {expr_text(s.value)}"
    if isinstance(s, A.IncDec):
        return "EXPRESSION", f"{expr_text(s.target)}{s.op}"
    if isinstance(s, A.ExprStmt):
        return "EXPRESSION", expr_text(s.expr)
    if isinstance(s, A.Require):
        if s.message is None:
            return "EXPRESSION", f"require(bool)({expr_text(s.cond)})"
        return "EXPRESSION", f"require(bool,string)({expr_text(s.cond)},{expr_text(s.message)})"
    if isinstance(s, A.Assert):
        return "EXPRESSION", f"assert(bool)({expr_text(s.cond)})"
    if isinstance(s, A.Revert):
        if s.message is None:
            return "EXPRESSION", "revert()()"
        return "EXPRESSION", f"revert(string)({expr_text(s.message)})"
    if isinstance(s, A.Return):
        return "RETURN", "" if s.value is None else expr_text(s.value)
    if isinstance(s, A.If):
        return "IF", expr_text(s.cond)
    if isinstance(s, A.While):
        return "IF_LOOP", expr_text(s.cond)
    if isinstance(s, A.For):
        return "IF_LOOP", "true" if s.cond is None else expr_text(s.cond)
    raise LoweringError(f"no node for {type(s).__name__}")


class _FunctionLowerer:
    def __init__(self, contract: A.ContractAst, fn: A.FunctionAst, counters: _Counters):
        self.contract = contract
        self.fn = fn
        self.counters = counters
        self.symbols: dict[str, Symbol] = {}
        self.ref_roots: dict[str, str] = {}
        self.out: list[IrInstr] = []
        self.line = 0

    # -- symbols ----------------------------------------------------------------

    def declare_symbols(self) -> set[str]:
        for name, t in BUILTIN_VARS.items():
            self.symbols[name] = Symbol(name, t, "builtin")
        for sv in self.contract.state_vars:
            self.symbols[sv.name] = Symbol(sv.name, sv.var_type, "state")
        for p in self.fn.params:
            if p.name:
                self.symbols[p.name] = Symbol(p.name, p.var_type, "parameter")
        zero = set()
        for r in self.fn.returns:
            if r.name:
                self.symbols[r.name] = Symbol(r.name, r.var_type, "local")
                zero.add(r.name)
        for s in A.walk_statements(self.fn.body):
            if isinstance(s, A.VarDecl):
                self.symbols[s.name] = Symbol(s.name, s.var_type, "local")
        return zero

    def new_tmp(self, t: A.MiniSolType) -> Var:
        v = Var(f"TMP_{next(self.counters.tmp)}")
        self.symbols[v.name] = Symbol(v.name, t, "temporary")
        return v

    def new_ref(self, t: A.MiniSolType, root: str) -> Var:
        v = Var(f"REF_{next(self.counters.ref)}")
        self.symbols[v.name] = Symbol(v.name, t, "reference")
        self.ref_roots[v.name] = root
        return v

    def root_of(self, v: Var) -> str:
        return self.ref_roots.get(v.name, v.name)

    def emit(self, kind: str, dest=None, operands=(), op=None) -> None:
        self.out.append(IrInstr(kind, dest, tuple(operands), self.line, op))

    # -- expressions ------------------------------------------------------------

    def expr(self, e: A.Expr) -> Operand:
        if isinstance(e, A.IntLit):
            return Lit(e.value)
        if isinstance(e, A.BoolLit):
            return Lit(e.value)
        if isinstance(e, A.StrLit):
            return Lit(e.value)
        if isinstance(e, A.Ident):
            return Var(e.name)
        if isinstance(e, A.Unary):
            if e.op == "-" and isinstance(e.operand, A.IntLit):
                return Lit(-e.operand.value)
            operand = self.expr(e.operand)
            dest = self.new_tmp(e.type)
            self.emit("UNOP", dest, (operand,), e.op)
            return dest
        if isinstance(e, A.Binary):
            left = self.expr(e.left)
            right = self.expr(e.right)
            dest = self.new_tmp(e.type)
            self.emit("BINOP", dest, (left, right), e.op)
            return dest
        if isinstance(e, A.Member):
            name = builtin_name(e)
            if name is not None:
                return Var(name)
            base = self.expr(e.base)
            if not isinstance(base, Var):
                raise LoweringError(f"line {e.line}: member access on a literal")
            dest = self.new_ref(e.type, self.root_of(base))
            self.emit("MEMBER_READ", dest, (base,), e.name)
            return dest
        if isinstance(e, A.Index):
            base = self.expr(e.base)
            index = self.expr(e.index)
            if not isinstance(base, Var):
                raise LoweringError(f"line {e.line}: indexing a literal")
            dest = self.new_ref(e.type, self.root_of(base))
            self.emit("INDEX_READ", dest, (base, index))
            return dest
        if isinstance(e, A.Call):
            return self.call(e)
        raise LoweringError(f"line {e.line}: unsupported expression {type(e).__name__}")

    def call(self, e: A.Call) -> Optional[Operand]:
        callee = e.callee
        if isinstance(callee, A.Ident) and callee.name in _CONVERSIONS:
            arg = self.expr(e.args[0])
            dest = self.new_tmp(e.type)
            self.emit("ASSIGN", dest, (arg,), "convert")
            return dest
        if isinstance(callee, A.Member) and callee.name in ("transfer", "send", "call"):
            receiver = self.expr(callee.base)
            args = [self.expr(a) for a in e.args]
            dest = None if callee.name == "transfer" else self.new_tmp(A.BoolType())
            self.emit("BUILTIN_CALL", dest, [receiver, *args], callee.name)
            return dest
        raise LoweringError(f"line {e.line}: unsupported call {expr_text(e)}")

    def as_temp(self, e: A.Expr) -> Var:
        """Condition operand: always a temporary."""
        v = self.expr(e)
        if isinstance(v, Var) and self.symbols[v.name].origin == "temporary":
            return v
        dest = self.new_tmp(A.BoolType())
        self.emit("ASSIGN", dest, (v,))
        return dest

    def store(self, target: A.Expr, value: Operand) -> None:
        if isinstance(target, A.Ident):
            self.emit("ASSIGN", Var(target.name), (value,))
        elif isinstance(target, A.Index):
            base = self.expr(target.base)
            index = self.expr(target.index)
            self.emit("INDEX_WRITE", None, (base, index, value))
        elif isinstance(target, A.Member):
            base = self.expr(target.base)
            self.emit("MEMBER_WRITE", None, (base, value), target.name)
        else:
            raise LoweringError(f"line {target.line}: not assignable")

    # -- statements -------------------------------------------------------------

    def stmt(self, s: A.Stmt) -> list[IrInstr]:
        self.out = []
        self.line = s.line
        if isinstance(s, A.VarDecl):
            value = self.expr(s.init) if s.init is not None else Lit(None)
            self.emit("ASSIGN", Var(s.name), (value,))
        elif isinstance(s, A.Assign):
            if s.op == "=":
                value = self.expr(s.value)
            else:
                current = self.expr(s.target)
                rhs = self.expr(s.value)
                value = self.new_tmp(s.target.type)
                self.emit("BINOP", value, (current, rhs), s.op[0])
            self.store(s.target, value)
        elif isinstance(s, A.IncDec):
            current = self.expr(s.target)
            value = self.new_tmp(s.target.type)
            self.emit("BINOP", value, (current, Lit(1)), s.op[0])
            self.store(s.target, value)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, (A.Require, A.Assert)):
            cond = self.as_temp(s.cond)
            # the call itself occupies a temporary slot
            next(self.counters.tmp)
            message = getattr(s, "message", None)
            operands = [cond] if message is None else [cond, Lit(message.value)]
            self.emit("REQUIRE" if isinstance(s, A.Require) else "ASSERT", None, operands)
        elif isinstance(s, A.Revert):
            self.emit("REVERT", None, [] if s.message is None else [Lit(s.message.value)])
        elif isinstance(s, A.Return):
            self.emit("RETURN", None, [] if s.value is None else [self.expr(s.value)])
        elif isinstance(s, (A.If, A.While)):
            self.emit("CONDITION", None, (self.as_temp(s.cond),))
        elif isinstance(s, A.For):
            cond = self.as_temp(s.cond if s.cond is not None else A.BoolLit(True, line=s.line, type=A.BoolType()))
            self.emit("CONDITION", None, (cond,))
        else:
            raise LoweringError(f"line {s.line}: unsupported statement {type(s).__name__}")
        return self.out

    def lower(self) -> LoweredFunction:
        zero = self.declare_symbols()
        blocks = []
        for label, s in enumerate(A.walk_statements(self.fn.body), start=1):
            kind, text = stmt_header(s)
            instrs = self.stmt(s)
            blocks.append((label, StmtBlock(s, kind, text, s.line, instrs)))
        return LoweredFunction(self.contract, self.fn, blocks, self.symbols, self.ref_roots, zero)


def lower_contract(contract: A.ContractAst) -> dict[str, LoweredFunction]:
    """Lower every function of a type-checked contract, in declaration order."""
    counters = _Counters()
    return {fn.name: _FunctionLowerer(contract, fn, counters).lower() for fn in contract.functions}


def lower_function(fn: A.FunctionAst, contract: Optional[A.ContractAst] = None) -> LoweredFunction:
    """Lower one function.  Temporary numbering follows the functions that
    precede ``fn`` in ``contract`` when one is given."""
    if contract is None:
        contract = A.ContractAst("", [], [fn])
    lowered = lower_contract(contract)
    return lowered[fn.name]
