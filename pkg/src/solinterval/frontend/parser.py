"""Recursive-descent parser producing a ``ContractAst``.

Accepts one or more contracts per file, or a file holding only free
functions (wrapped in an anonymous contract).  ``pragma`` directives are
recorded and otherwise ignored.  There is no error recovery: the first
violation raises ``ParseError``.
"""

from __future__ import annotations

from typing import Optional

from . import ast as A
from .lexer import Token, TokenKind, tokenize


class ParseError(Exception):
    def __init__(self, line: int, expected: set[str] | list[str], found: str):
        self.line = line
        self.expected = sorted(set(expected))
        self.found = found
        super().__init__(f"line {line}: expected {' or '.join(self.expected)}, found {found!r}")


_VISIBILITY = {"public", "private", "internal", "external"}
_MUTABILITY = {"pure", "view", "payable"}
_LOCATIONS = {"memory", "storage", "calldata"}
_ELEMENTARY = {"uint", "int", "bool", "address", "string"} | {
    f"{p}{b}" for p in ("uint", "int") for b in range(8, 257, 8)}
_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%="}

# binary operator precedence, loosest first
_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


def _elementary(word: str) -> A.MiniSolType:
    if word == "bool":
        return A.BoolType()
    if word == "address":
        return A.AddressType()
    if word == "string":
        return A.StringType()
    if word.startswith("uint"):
        return A.UIntType(int(word[4:] or 256))
    return A.IntType(int(word[3:] or 256))


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.struct_names = {
            tokens[i + 1].lexeme
            for i, tok in enumerate(tokens[:-1])
            if tok.lexeme == "struct" and tokens[i + 1].kind is TokenKind.IDENTIFIER
        }
        self.structs: dict[str, A.StructDef] = {}

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Optional[Token]:
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def at(self, *lexemes: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind not in (TokenKind.STRING,) and tok.lexeme in lexemes

    def line(self) -> int:
        tok = self.peek()
        if tok is None:
            return self.tokens[-1].line if self.tokens else 1
        return tok.line

    def fail(self, expected) -> ParseError:
        tok = self.peek()
        return ParseError(self.line(), set(expected), tok.lexeme if tok else "<eof>")

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.fail({"<token>"})
        self.pos += 1
        return tok

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise self.fail({lexeme})
        return self.next()

    def expect_ident(self) -> str:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENTIFIER:
            raise self.fail({"<identifier>"})
        self.pos += 1
        return tok.lexeme

    # -- top level ----------------------------------------------------------

    def parse_source(self) -> list[A.ContractAst]:
        pragmas: list[str] = []
        contracts: list[A.ContractAst] = []
        free: list[A.FunctionAst] = []
        first_line = self.line()
        while self.peek() is not None:
            if self.at("pragma"):
                pragmas.append(self.parse_pragma())
            elif self.at("contract"):
                contracts.append(self.parse_contract_body())
            elif self.at("function"):
                free.append(self.parse_function())
            else:
                raise self.fail({"pragma", "contract", "function"})
        if free:
            contracts.insert(0, A.ContractAst("", [], free, line=first_line))
        for c in contracts:
            c.pragmas = list(pragmas)
        return contracts

    def parse_pragma(self) -> str:
        self.expect("pragma")
        parts = []
        while not self.at(";"):
            parts.append(self.next().lexeme)
        self.expect(";")
        return " ".join(parts)

    def parse_contract_body(self) -> A.ContractAst:
        line = self.expect("contract").line
        name = self.expect_ident()
        self.expect("{")
        state_vars: list[A.StateVar] = []
        functions: list[A.FunctionAst] = []
        structs: list[A.StructDef] = []
        while not self.at("}"):
            if self.peek() is None:
                raise self.fail({"}"})
            if self.at("function"):
                functions.append(self.parse_function())
            elif self.at("struct"):
                sd = self.parse_struct()
                structs.append(sd)
                self.structs[sd.name] = sd
            else:
                state_vars.append(self.parse_state_var())
        self.expect("}")
        contract = A.ContractAst(name, state_vars, functions, structs, line=line)
        return _resolve_structs(contract)

    def parse_struct(self) -> A.StructDef:
        line = self.expect("struct").line
        name = self.expect_ident()
        self.expect("{")
        fields = []
        while not self.at("}"):
            ftype = self.parse_type()
            fields.append((self.expect_ident(), ftype))
            self.expect(";")
        self.expect("}")
        return A.StructDef(name, fields, line=line)

    def parse_state_var(self) -> A.StateVar:
        line = self.line()
        vtype = self.parse_type()
        visibility, constant = None, False
        while self.at(*_VISIBILITY, "constant"):
            word = self.next().lexeme
            if word == "constant":
                constant = True
            else:
                visibility = word
        name = self.expect_ident()
        init = None
        if self.at("="):
            self.next()
            init = self.parse_expr()
        self.expect(";")
        return A.StateVar(name, vtype, visibility, constant, init, line=line)

    def parse_function(self) -> A.FunctionAst:
        line = self.expect("function").line
        name = self.expect_ident()
        params = self.parse_params()
        visibility, mutability = None, "default"
        returns: list[A.Param] = []
        while True:
            if self.at(*_VISIBILITY):
                visibility = self.next().lexeme
            elif self.at(*_MUTABILITY):
                mutability = self.next().lexeme
            elif self.at("returns"):
                self.next()
                returns = self.parse_params()
            else:
                break
        body = self.parse_block()
        return A.FunctionAst(name, params, returns, visibility, mutability, body, line=line)

    def parse_params(self) -> list[A.Param]:
        self.expect("(")
        params = []
        while not self.at(")"):
            line = self.line()
            ptype = self.parse_type()
            location = self.next().lexeme if self.at(*_LOCATIONS) else None
            pname = ""
            tok = self.peek()
            if tok is not None and tok.kind is TokenKind.IDENTIFIER:
                pname = self.expect_ident()
            params.append(A.Param(pname, ptype, location, line=line))
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return params

    # -- types --------------------------------------------------------------

    def at_type_start(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.lexeme in _ELEMENTARY or tok.lexeme == "mapping":
            return tok.kind is TokenKind.KEYWORD
        return tok.kind is TokenKind.IDENTIFIER and tok.lexeme in self.struct_names

    def parse_type(self) -> A.MiniSolType:
        tok = self.peek()
        if tok is None:
            raise self.fail({"<type>"})
        if tok.lexeme == "mapping" and tok.kind is TokenKind.KEYWORD:
            self.next()
            self.expect("(")
            key = self.parse_type()
            self.expect("=>")
            value = self.parse_type()
            self.expect(")")
            base: A.MiniSolType = A.MappingType(key, value)
        elif tok.kind is TokenKind.KEYWORD and tok.lexeme in _ELEMENTARY:
            self.next()
            base = _elementary(tok.lexeme)
            if isinstance(base, A.AddressType) and self.at("payable"):
                self.next()
                base = A.AddressType(payable=True)
        elif tok.kind is TokenKind.IDENTIFIER and tok.lexeme in self.struct_names:
            self.next()
            base = A.StructType(tok.lexeme)
        else:
            raise self.fail({"<type>"})
        while self.at("[") and (self.at("]", offset=1) or self._int_then_close()):
            self.next()
            length = None
            if not self.at("]"):
                length = int(self.next().lexeme, 0)
            self.expect("]")
            base = A.ArrayType(base, length)
        return base

    def _int_then_close(self) -> bool:
        tok = self.peek(1)
        return tok is not None and tok.kind is TokenKind.INTEGER and self.at("]", offset=2)

    # -- statements ---------------------------------------------------------

    def parse_block(self) -> A.Block:
        line = self.expect("{").line
        stmts = []
        while not self.at("}"):
            if self.peek() is None:
                raise self.fail({"}"})
            stmts.append(self.parse_statement())
        self.expect("}")
        return A.Block(stmts, line=line)

    def parse_body(self) -> A.Block:
        if self.at("{"):
            return self.parse_block()
        line = self.line()
        return A.Block([self.parse_statement()], line=line)

    def parse_statement(self) -> A.Stmt:
        line = self.line()
        if self.at("{"):
            return self.parse_block()
        if self.at("if"):
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_body()
            orelse = None
            if self.at("else"):
                self.next()
                orelse = self.parse_body()
            return A.If(cond, then, orelse, line=line)
        if self.at("while"):
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return A.While(cond, self.parse_body(), line=line)
        if self.at("for"):
            return self.parse_for()
        if self.at("return"):
            self.next()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return A.Return(value, line=line)
        if self.at_type_start() and not self.at("(", offset=1):
            stmt = self.parse_var_decl()
            self.expect(";")
            return stmt
        stmt = self.parse_simple_statement()
        self.expect(";")
        return stmt

    def parse_var_decl(self) -> A.VarDecl:
        line = self.line()
        vtype = self.parse_type()
        location = self.next().lexeme if self.at(*_LOCATIONS) else None
        name = self.expect_ident()
        init = None
        if self.at("="):
            self.next()
            init = self.parse_expr()
        return A.VarDecl(vtype, name, init, location, line=line)

    def parse_for(self) -> A.For:
        line = self.expect("for").line
        self.expect("(")
        init: Optional[A.Stmt] = None
        if not self.at(";"):
            if self.at_type_start():
                init = self.parse_var_decl()
            else:
                init = self.parse_simple_statement()
        self.expect(";")
        cond = None if self.at(";") else self.parse_expr()
        self.expect(";")
        post = None if self.at(")") else self.parse_simple_statement()
        self.expect(")")
        return A.For(init, cond, post, self.parse_body(), line=line)

    def parse_simple_statement(self) -> A.Stmt:
        line = self.line()
        if self.at("++", "--"):
            op = self.next().lexeme
            return A.IncDec(self.parse_unary(), op, line=line)
        expr = self.parse_expr()
        if self.at(*_ASSIGN_OPS):
            op = self.next().lexeme
            return A.Assign(expr, op, self.parse_expr(), line=line)
        if self.at("++", "--"):
            return A.IncDec(expr, self.next().lexeme, line=line)
        if isinstance(expr, A.Call) and isinstance(expr.callee, A.Ident):
            name, args = expr.callee.name, expr.args
            if name == "require" and 1 <= len(args) <= 2:
                return A.Require(args[0], args[1] if len(args) == 2 else None, line=line)
            if name == "assert" and len(args) == 1:
                return A.Assert(args[0], line=line)
            if name == "revert" and len(args) <= 1:
                return A.Revert(args[0] if args else None, line=line)
        return A.ExprStmt(expr, line=line)

    # -- expressions --------------------------------------------------------

    def parse_expr(self, level: int = 0) -> A.Expr:
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        while self.at(*_BINARY_LEVELS[level]):
            tok = self.next()
            right = self.parse_expr(level + 1)
            left = A.Binary(tok.lexeme, left, right, line=left.line)
        return left

    def parse_unary(self) -> A.Expr:
        if self.at("!", "-"):
            tok = self.next()
            return A.Unary(tok.lexeme, self.parse_unary(), line=tok.line)
        return self.parse_postfix(self.parse_primary())

    def parse_postfix(self, expr: A.Expr) -> A.Expr:
        while True:
            if self.at("["):
                self.next()
                index = self.parse_expr()
                self.expect("]")
                expr = A.Index(expr, index, line=expr.line)
            elif self.at("."):
                self.next()
                tok = self.peek()
                if tok is None or tok.kind not in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
                    raise self.fail({"<member name>"})
                self.next()
                expr = A.Member(expr, tok.lexeme, line=expr.line)
            elif self.at("("):
                self.next()
                args = []
                while not self.at(")"):
                    args.append(self.parse_expr())
                    if not self.at(")"):
                        self.expect(",")
                self.expect(")")
                expr = A.Call(expr, args, line=expr.line)
            else:
                return expr

    def parse_primary(self) -> A.Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail({"<expression>"})
        if tok.kind is TokenKind.INTEGER:
            self.next()
            return A.IntLit(int(tok.lexeme, 0), tok.lexeme, line=tok.line)
        if tok.kind is TokenKind.STRING:
            self.next()
            return A.StrLit(tok.lexeme[1:-1], line=tok.line)
        if tok.lexeme in ("true", "false") and tok.kind is TokenKind.KEYWORD:
            self.next()
            return A.BoolLit(tok.lexeme == "true", line=tok.line)
        if tok.kind is TokenKind.IDENTIFIER:
            self.next()
            return A.Ident(tok.lexeme, line=tok.line)
        if tok.kind is TokenKind.KEYWORD and (tok.lexeme in _ELEMENTARY or tok.lexeme == "payable") \
                and self.at("(", offset=1):
            # conversions such as payable(x) or uint256(y) behave as builtins
            self.next()
            return A.Ident(tok.lexeme, line=tok.line)
        if tok.lexeme == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise self.fail({"<expression>"})


def _resolve_structs(contract: A.ContractAst) -> A.ContractAst:
    """Replace name-only struct references with fully-fielded struct types."""
    defs = {sd.name: sd for sd in contract.structs}
    cache: dict[str, A.StructType] = {}

    def resolve(t):
        if isinstance(t, A.StructType):
            if t.name not in defs:
                return t
            if t.name not in cache:
                cache[t.name] = A.StructType(t.name)  # recursion guard
                fields = tuple((n, resolve(ft)) for n, ft in defs[t.name].fields)
                cache[t.name] = A.StructType(t.name, fields)
            return cache[t.name]
        if isinstance(t, A.ArrayType):
            return A.ArrayType(resolve(t.element), t.length)
        if isinstance(t, A.MappingType):
            return A.MappingType(resolve(t.key), resolve(t.value))
        return t

    for sd in contract.structs:
        sd.fields = [(n, resolve(ft)) for n, ft in sd.fields]
    for sv in contract.state_vars:
        sv.var_type = resolve(sv.var_type)
    for fn in contract.functions:
        for p in fn.params + fn.returns:
            p.var_type = resolve(p.var_type)
        for stmt in A.walk_statements(fn.body):
            if isinstance(stmt, A.VarDecl):
                stmt.var_type = resolve(stmt.var_type)
    return contract


def parse_source(tokens_or_text) -> list[A.ContractAst]:
    tokens = tokenize(tokens_or_text) if isinstance(tokens_or_text, str) else tokens_or_text
    return Parser(tokens).parse_source()


def parse_contract(tokens_or_text, name: Optional[str] = None) -> A.ContractAst:
    """Parse a source file and return one contract (by name, or the first)."""
    contracts = parse_source(tokens_or_text)
    if not contracts:
        raise ParseError(1, {"contract", "function"}, "<eof>")
    if name is None:
        return contracts[0]
    for c in contracts:
        if c.name == name:
            return c
    raise KeyError(name)
