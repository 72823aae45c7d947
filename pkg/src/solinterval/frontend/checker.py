"""Name resolution and type checking.

``check_types`` returns an annotated deep copy: every expression node gets
its ``type`` filled in.  The builtins visible in every function are the
ones the state dumps report (``msg.*`` and ``block.*``).
"""

from __future__ import annotations

import copy
from typing import Optional

from . import ast as A


class TypeCheckError(Exception):
    def __init__(self, node, message: str):
        self.node = node
        self.line = getattr(node, "line", 0)
        self.message = message
        super().__init__(f"line {self.line}: {message}")


BUILTIN_VARS: dict[str, A.MiniSolType] = {
    "block.timestamp": A.UIntType(),
    "block.difficulty": A.UIntType(),
    "block.number": A.UIntType(),
    "msg.sender": A.AddressType(),
    "msg.value": A.UIntType(),
}

_ARITH = {"+", "-", "*", "/", "%"}
_ORDER = {"<", "<=", ">", ">="}
_EQUALITY = {"==", "!="}
_LOGIC = {"&&", "||"}
_CONVERSIONS = {"uint", "int", "address"} | {
    f"{p}{b}" for p in ("uint", "int") for b in range(8, 257, 8)}


def is_literal(e: A.Expr) -> bool:
    if isinstance(e, A.IntLit):
        return True
    if isinstance(e, A.Unary) and e.op == "-":
        return is_literal(e.operand)
    if isinstance(e, A.Binary) and e.op in _ARITH:
        return is_literal(e.left) and is_literal(e.right)
    return False


def builtin_name(e: A.Expr) -> Optional[str]:
    """``msg.sender`` style builtin member access, else None."""
    if isinstance(e, A.Member) and isinstance(e.base, A.Ident) and e.base.name in ("msg", "block"):
        name = f"{e.base.name}.{e.name}"
        if name in BUILTIN_VARS:
            return name
    return None


def terminates(stmt: A.Stmt) -> bool:
    if isinstance(stmt, (A.Return, A.Revert)):
        return True
    if isinstance(stmt, A.Block):
        return any(terminates(s) for s in stmt.stmts)
    if isinstance(stmt, A.If):
        return stmt.orelse is not None and terminates(stmt.then) and terminates(stmt.orelse)
    return False


def _conversion_type(name: str) -> A.MiniSolType:
    if name == "address":
        return A.AddressType()
    if name.startswith("uint"):
        return A.UIntType(int(name[4:] or 256))
    return A.IntType(int(name[3:] or 256))


class _Checker:
    def __init__(self, contract: A.ContractAst):
        self.contract = contract
        self.state: dict[str, A.MiniSolType] = {}
        self.scopes: list[dict[str, A.MiniSolType]] = []
        self.fn: Optional[A.FunctionAst] = None
        self.locals: dict[str, A.MiniSolType] = {}

    # -- scopes ---------------------------------------------------------------

    def lookup(self, name: str) -> Optional[A.MiniSolType]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return self.state.get(name)

    def declare(self, node, name: str, vtype: A.MiniSolType) -> None:
        if self.lookup(name) is not None:
            raise TypeCheckError(node, f"redeclaration of {name!r}")
        if name in self.locals and self.locals[name] != vtype:
            raise TypeCheckError(node, f"{name!r} redeclared with a different type")
        self.scopes[-1][name] = vtype
        self.locals[name] = vtype

    # -- contract / function ----------------------------------------------------

    def check_contract(self) -> None:
        seen: set[str] = set()
        for sv in self.contract.state_vars:
            if sv.name in seen:
                raise TypeCheckError(sv, f"duplicate state variable {sv.name!r}")
            seen.add(sv.name)
            self._check_decl_type(sv, sv.var_type)
            self.state[sv.name] = sv.var_type
            if sv.init is not None:
                self.expect_assignable(sv.var_type, sv.init, sv)
        names: set[str] = set()
        for fn in self.contract.functions:
            if fn.name in names:
                raise TypeCheckError(fn, f"duplicate function {fn.name!r}")
            names.add(fn.name)
            self.check_function(fn)

    def _check_decl_type(self, node, t: A.MiniSolType) -> None:
        if isinstance(t, A.StructType):
            if not t.fields:
                raise TypeCheckError(node, f"unknown struct {t.name!r}")
            fnames = [f for f, _ in t.fields]
            if len(set(fnames)) != len(fnames):
                raise TypeCheckError(node, f"duplicate field in struct {t.name!r}")
        elif isinstance(t, A.MappingType):
            if not isinstance(t.key, A.SCALAR_TYPES):
                raise TypeCheckError(node, "mapping keys must be scalar")
            self._check_decl_type(node, t.value)
        elif isinstance(t, A.ArrayType):
            self._check_decl_type(node, t.element)

    def check_function(self, fn: A.FunctionAst) -> None:
        self.fn = fn
        self.locals = {}
        self.scopes = [{}]
        for p in fn.params:
            self._check_decl_type(p, p.var_type)
            if p.name:
                self.declare(p, p.name, p.var_type)
        for r in fn.returns:
            if r.name:
                self.declare(r, r.name, r.var_type)
        self.check_block(fn.body, new_scope=False)
        self.fn = None

    # -- statements -------------------------------------------------------------

    def check_block(self, block: A.Block, new_scope: bool = True) -> None:
        if new_scope:
            self.scopes.append({})
        for i, stmt in enumerate(block.stmts):
            if i > 0 and terminates(block.stmts[i - 1]):
                raise TypeCheckError(stmt, "unreachable statement after return/revert")
            self.check_stmt(stmt)
        if new_scope:
            self.scopes.pop()

    def check_stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Block):
            self.check_block(s)
        elif isinstance(s, A.VarDecl):
            self._check_decl_type(s, s.var_type)
            if isinstance(s.var_type, A.MappingType):
                raise TypeCheckError(s, "local mappings are not supported")
            if s.init is not None:
                self.expect_assignable(s.var_type, s.init, s)
            self.declare(s, s.name, s.var_type)
        elif isinstance(s, A.Assign):
            target = self.check_lvalue(s.target)
            if s.op == "=":
                self.expect_assignable(target, s.value, s)
            else:
                self.check_binary_types(s, s.op[0], s.target, s.value)
        elif isinstance(s, A.IncDec):
            target = self.check_lvalue(s.target)
            if not isinstance(target, (A.UIntType, A.IntType)):
                raise TypeCheckError(s, f"{s.op} needs an integer operand")
        elif isinstance(s, A.ExprStmt):
            self.check_expr(s.expr, allow_void=True)
        elif isinstance(s, (A.Require, A.Assert)):
            self.expect_bool(s.cond)
            if isinstance(s, A.Require) and s.message is not None:
                self._expect_string(s.message)
        elif isinstance(s, A.Revert):
            if s.message is not None:
                self._expect_string(s.message)
        elif isinstance(s, A.Return):
            if s.value is not None:
                rt = self.fn.return_type if self.fn else None
                if rt is None:
                    raise TypeCheckError(s, "function does not return a value")
                self.expect_assignable(rt, s.value, s)
        elif isinstance(s, A.If):
            self.expect_bool(s.cond)
            self.check_block(s.then)
            if s.orelse is not None:
                self.check_block(s.orelse)
        elif isinstance(s, A.While):
            self.expect_bool(s.cond)
            self.check_block(s.body)
        elif isinstance(s, A.For):
            self.scopes.append({})
            if s.init is not None:
                self.check_stmt(s.init)
            if s.cond is not None:
                self.expect_bool(s.cond)
            self.check_block(s.body)
            if s.post is not None:
                self.check_stmt(s.post)
            self.scopes.pop()
        else:
            raise TypeCheckError(s, f"unsupported statement {type(s).__name__}")

    def _expect_string(self, e: A.Expr) -> None:
        if not isinstance(e, A.StrLit):
            raise TypeCheckError(e, "expected a string literal")
        e.type = A.StringType()

    def check_lvalue(self, e: A.Expr) -> A.MiniSolType:
        if isinstance(e, A.Ident):
            t = self.check_expr(e)
            return t
        if isinstance(e, (A.Index, A.Member)):
            if builtin_name(e) is not None:
                raise TypeCheckError(e, f"cannot assign to builtin {builtin_name(e)}")
            t = self.check_expr(e)
            if isinstance(e, A.Member) and isinstance(e.base.type, A.ArrayType):
                raise TypeCheckError(e, "cannot assign to length")
            return t
        raise TypeCheckError(e, "expression is not assignable")

    # -- expressions ------------------------------------------------------------

    def expect_bool(self, e: A.Expr) -> None:
        t = self.check_expr(e)
        if not isinstance(t, A.BoolType):
            raise TypeCheckError(e, f"expected bool, found {t}")

    def expect_assignable(self, target: A.MiniSolType, value: A.Expr, node) -> None:
        vt = self.check_expr(value)
        if not self.assignable(target, vt, value):
            raise TypeCheckError(node, f"cannot assign {vt} to {target}")

    @staticmethod
    def assignable(target, vt, value: A.Expr) -> bool:
        if isinstance(target, A.UIntType):
            if is_literal(value):
                return not (isinstance(value, A.Unary) and value.op == "-")
            return isinstance(vt, A.UIntType)
        if isinstance(target, A.IntType):
            return is_literal(value) or isinstance(vt, A.IntType)
        if isinstance(target, A.AddressType):
            return isinstance(vt, A.AddressType)
        return target == vt

    def check_binary_types(self, node, op: str, left: A.Expr, right: A.Expr) -> A.MiniSolType:
        lt, rt = self.check_expr(left), self.check_expr(right)
        if op in _LOGIC:
            if not (isinstance(lt, A.BoolType) and isinstance(rt, A.BoolType)):
                raise TypeCheckError(node, f"operator {op} needs bool operands")
            return A.BoolType()
        if op in _ARITH or op in _ORDER:
            if op in _ORDER and isinstance(lt, A.AddressType) and isinstance(rt, A.AddressType):
                return A.BoolType()
            result = self._numeric_join(node, op, left, lt, right, rt)
            return A.BoolType() if op in _ORDER else result
        if op in _EQUALITY:
            if isinstance(lt, A.BoolType) and isinstance(rt, A.BoolType):
                return A.BoolType()
            if isinstance(lt, A.AddressType) and isinstance(rt, A.AddressType):
                return A.BoolType()
            self._numeric_join(node, op, left, lt, right, rt)
            return A.BoolType()
        raise TypeCheckError(node, f"unknown operator {op}")

    def _numeric_join(self, node, op, left, lt, right, rt) -> A.MiniSolType:
        ok = (isinstance(lt, (A.UIntType, A.IntType)) and isinstance(rt, (A.UIntType, A.IntType)))
        if not ok:
            raise TypeCheckError(node, f"operator {op} not defined for {lt} and {rt}")
        if is_literal(left) and not is_literal(right):
            return rt
        if is_literal(right) and not is_literal(left):
            return lt
        if type(lt) is not type(rt):
            if is_literal(left) and is_literal(right):
                return A.IntType()
            raise TypeCheckError(node, f"operator {op} mixes {lt} and {rt}")
        return type(lt)(max(lt.bits, rt.bits))

    def check_expr(self, e: A.Expr, allow_void: bool = False) -> A.MiniSolType:
        t = self._expr(e, allow_void)
        e.type = t
        return t

    def _expr(self, e: A.Expr, allow_void: bool):
        if isinstance(e, A.IntLit):
            return A.UIntType()
        if isinstance(e, A.BoolLit):
            return A.BoolType()
        if isinstance(e, A.StrLit):
            return A.StringType()
        if isinstance(e, A.Ident):
            t = self.lookup(e.name)
            if t is None:
                raise TypeCheckError(e, f"unknown identifier {e.name!r}")
            return t
        if isinstance(e, A.Unary):
            t = self.check_expr(e.operand)
            if e.op == "!":
                if not isinstance(t, A.BoolType):
                    raise TypeCheckError(e, "operator ! needs a bool operand")
                return t
            if is_literal(e.operand):
                return A.IntType()
            if not isinstance(t, A.IntType):
                raise TypeCheckError(e, "unary minus needs a signed operand")
            return t
        if isinstance(e, A.Binary):
            return self.check_binary_types(e, e.op, e.left, e.right)
        if isinstance(e, A.Index):
            bt = self.check_expr(e.base)
            it = self.check_expr(e.index)
            if isinstance(bt, A.ArrayType):
                if not isinstance(it, (A.UIntType, A.IntType)):
                    raise TypeCheckError(e, f"array index must be an integer, found {it}")
                return bt.element
            if isinstance(bt, A.MappingType):
                if not (self.assignable(bt.key, it, e.index) or
                        isinstance(bt.key, A.UIntType) and isinstance(it, A.UIntType)):
                    raise TypeCheckError(e, f"mapping key must be {bt.key}, found {it}")
                return bt.value
            raise TypeCheckError(e, f"type {bt} is not indexable")
        if isinstance(e, A.Member):
            name = builtin_name(e)
            if name is not None:
                e.base.type = None
                return BUILTIN_VARS[name]
            if isinstance(e.base, A.Ident) and e.base.name in ("msg", "block") \
                    and self.lookup(e.base.name) is None:
                raise TypeCheckError(e, f"unknown builtin {e.base.name}.{e.name}")
            bt = self.check_expr(e.base)
            if isinstance(bt, A.StructType):
                ft = bt.field_type(e.name)
                if ft is None:
                    raise TypeCheckError(e, f"struct {bt.name} has no field {e.name!r}")
                return ft
            if isinstance(bt, A.ArrayType) and e.name == "length":
                return A.UIntType()
            if isinstance(bt, A.AddressType) and e.name in ("transfer", "send", "call"):
                return bt  # refined at the call site
            raise TypeCheckError(e, f"type {bt} has no member {e.name!r}")
        if isinstance(e, A.Call):
            return self._call(e, allow_void)
        raise TypeCheckError(e, f"unsupported expression {type(e).__name__}")

    def _call(self, e: A.Call, allow_void: bool):
        callee = e.callee
        if isinstance(callee, A.Ident):
            name = callee.name
            if name == "payable" or name in _CONVERSIONS:
                if len(e.args) != 1:
                    raise TypeCheckError(e, f"{name}() takes one argument")
                at = self.check_expr(e.args[0])
                if name == "payable":
                    if not isinstance(at, A.AddressType):
                        raise TypeCheckError(e, "payable() needs an address")
                    return A.AddressType(payable=True)
                target = _conversion_type(name)
                if not isinstance(at, (A.UIntType, A.IntType, A.AddressType)):
                    raise TypeCheckError(e, f"cannot convert {at} to {target}")
                return target
            if name in ("require", "assert", "revert"):
                raise TypeCheckError(e, f"{name} is only allowed as a statement")
            raise TypeCheckError(e, f"unknown builtin function {name!r}")
        if isinstance(callee, A.Member) and callee.name in ("transfer", "send", "call"):
            rt = self.check_expr(callee.base)
            if not isinstance(rt, A.AddressType):
                raise TypeCheckError(e, f"{callee.name} needs an address receiver")
            callee.type = rt
            for a in e.args:
                self.check_expr(a)
            if callee.name == "transfer":
                if len(e.args) != 1 or not isinstance(e.args[0].type, A.UIntType):
                    raise TypeCheckError(e, "transfer takes one uint amount")
                if not allow_void:
                    raise TypeCheckError(e, "transfer does not return a value")
                return None
            return A.BoolType()
        raise TypeCheckError(e, "calls between user functions are not supported")


def check_types(contract: A.ContractAst) -> A.ContractAst:
    typed = copy.deepcopy(contract)
    _Checker(typed).check_contract()
    return typed


def local_types(fn: A.FunctionAst) -> dict[str, A.MiniSolType]:
    """Every local declared anywhere in the function body."""
    return {s.name: s.var_type for s in A.walk_statements(fn.body) if isinstance(s, A.VarDecl)}
