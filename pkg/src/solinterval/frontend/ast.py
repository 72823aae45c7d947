"""MiniSol types and syntax tree.

Every node carries the line of its first token.  Line numbers and the
type annotations filled in by the checker are excluded from equality so
that two parses of the same program compare equal structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# -- types ------------------------------------------------------------------

@dataclass(frozen=True)
class UIntType:
    bits: int = 256

    def __str__(self) -> str:
        return "uint" if self.bits == 256 else f"uint{self.bits}"


@dataclass(frozen=True)
class IntType:
    bits: int = 256

    def __str__(self) -> str:
        return "int" if self.bits == 256 else f"int{self.bits}"


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class AddressType:
    payable: bool = False

    def __str__(self) -> str:
        return "address payable" if self.payable else "address"


@dataclass(frozen=True)
class StringType:
    def __str__(self) -> str:
        return "string"


@dataclass(frozen=True)
class StructType:
    name: str
    fields: tuple[tuple[str, "MiniSolType"], ...] = ()

    def field_type(self, name: str) -> Optional["MiniSolType"]:
        for fname, ftype in self.fields:
            if fname == name:
                return ftype
        return None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrayType:
    element: "MiniSolType"
    length: Optional[int] = None

    def __str__(self) -> str:
        return f"{self.element}[{'' if self.length is None else self.length}]"


@dataclass(frozen=True)
class MappingType:
    key: "MiniSolType"
    value: "MiniSolType"

    def __str__(self) -> str:
        return f"mapping({self.key}=>{self.value})"


MiniSolType = Union[UIntType, IntType, BoolType, AddressType, StringType,
                    StructType, ArrayType, MappingType]

SCALAR_TYPES = (UIntType, IntType, BoolType, AddressType)


def is_numeric(t) -> bool:
    return isinstance(t, (UIntType, IntType, AddressType))


def is_composite(t) -> bool:
    return isinstance(t, (StructType, ArrayType, MappingType))


# -- expressions ------------------------------------------------------------

@dataclass
class Expr:
    line: int = field(default=0, compare=False, kw_only=True)
    type: Optional[MiniSolType] = field(default=None, compare=False, kw_only=True)


@dataclass
class Ident(Expr):
    name: str


@dataclass
class IntLit(Expr):
    value: int
    text: str = field(default="", compare=False)


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class Unary(Expr):
    op: str
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Index(Expr):
    base: Expr
    index: Expr


@dataclass
class Member(Expr):
    base: Expr
    name: str


@dataclass
class Call(Expr):
    callee: Expr
    args: list[Expr]


# -- statements -------------------------------------------------------------

@dataclass
class Stmt:
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass
class Block(Stmt):
    stmts: list[Stmt]


@dataclass
class VarDecl(Stmt):
    var_type: MiniSolType
    name: str
    init: Optional[Expr] = None
    location: Optional[str] = None


@dataclass
class Assign(Stmt):
    target: Expr
    op: str
    value: Expr


@dataclass
class IncDec(Stmt):
    target: Expr
    op: str


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Require(Stmt):
    cond: Expr
    message: Optional[Expr] = None


@dataclass
class Assert(Stmt):
    cond: Expr


@dataclass
class Revert(Stmt):
    message: Optional[Expr] = None


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Optional[Block] = None


@dataclass
class While(Stmt):
    cond: Expr
    body: Block


@dataclass
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    post: Optional[Stmt]
    body: Block


# -- declarations -----------------------------------------------------------

@dataclass
class Param:
    name: str
    var_type: MiniSolType
    location: Optional[str] = None
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass
class StateVar:
    name: str
    var_type: MiniSolType
    visibility: Optional[str] = None
    constant: bool = False
    init: Optional[Expr] = None
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass
class StructDef:
    name: str
    fields: list[tuple[str, MiniSolType]]
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass
class FunctionAst:
    name: str
    params: list[Param]
    returns: list[Param]
    visibility: Optional[str]
    mutability: str
    body: Block
    line: int = field(default=0, compare=False, kw_only=True)

    @property
    def return_type(self) -> Optional[MiniSolType]:
        return self.returns[0].var_type if self.returns else None


@dataclass
class ContractAst:
    name: str
    state_vars: list[StateVar]
    functions: list[FunctionAst]
    structs: list[StructDef] = field(default_factory=list)
    pragmas: list[str] = field(default_factory=list)
    line: int = field(default=0, compare=False, kw_only=True)

    def function(self, name: str) -> FunctionAst:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)


def walk_statements(block: Block):
    """Yield every non-block statement in source (pre-)order."""
    for stmt in block.stmts:
        if isinstance(stmt, Block):
            yield from walk_statements(stmt)
            continue
        if isinstance(stmt, For):
            # the loop head is the For node itself, labelled after its init
            if stmt.init is not None:
                yield stmt.init
            yield stmt
            yield from walk_statements(stmt.body)
            if stmt.post is not None:
                yield stmt.post
            continue
        yield stmt
        if isinstance(stmt, If):
            yield from walk_statements(stmt.then)
            if stmt.orelse is not None:
                yield from walk_statements(stmt.orelse)
        elif isinstance(stmt, While):
            yield from walk_statements(stmt.body)
