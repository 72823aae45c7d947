"""Pretty printer: AST back to MiniSol source."""

from __future__ import annotations

from . import ast as A

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


def expr_text(e: A.Expr, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.StrLit):
        return f'"{e.value}"'
    if isinstance(e, A.Unary):
        return f"{e.op}{expr_text(e.operand, 7)}"
    if isinstance(e, A.Binary):
        prec = _PREC[e.op]
        text = f"{expr_text(e.left, prec)} {e.op} {expr_text(e.right, prec, right=True)}"
        # left-associative: a right operand at equal precedence needs parens
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({text})"
        return text
    if isinstance(e, A.Index):
        return f"{expr_text(e.base, 8)}[{expr_text(e.index)}]"
    if isinstance(e, A.Member):
        return f"{expr_text(e.base, 8)}.{e.name}"
    if isinstance(e, A.Call):
        return f"{expr_text(e.callee, 8)}({', '.join(expr_text(a) for a in e.args)})"
    raise TypeError(f"cannot print {e!r}")


def simple_stmt_text(s: A.Stmt) -> str:
    """Single-line text of a non-compound statement (no trailing ';')."""
    if isinstance(s, A.VarDecl):
        loc = f" {s.location}" if s.location else ""
        init = f" = {expr_text(s.init)}" if s.init is not None else ""
        return f"{s.var_type}{loc} {s.name}{init}"
    if isinstance(s, A.Assign):
        return f"{expr_text(s.target)} {s.op} {expr_text(s.value)}"
    if isinstance(s, A.IncDec):
        return f"{expr_text(s.target)}{s.op}"
    if isinstance(s, A.ExprStmt):
        return expr_text(s.expr)
    if isinstance(s, A.Require):
        msg = f", {expr_text(s.message)}" if s.message is not None else ""
        return f"require({expr_text(s.cond)}{msg})"
    if isinstance(s, A.Assert):
        return f"assert({expr_text(s.cond)})"
    if isinstance(s, A.Revert):
        return f"revert({expr_text(s.message) if s.message is not None else ''})"
    if isinstance(s, A.Return):
        return "return" if s.value is None else f"return {expr_text(s.value)}"
    raise TypeError(f"not a simple statement: {type(s).__name__}")


def _block(b: A.Block, indent: int) -> list[str]:
    pad = "    " * indent
    lines = [pad + "{"]
    for s in b.stmts:
        lines.extend(_stmt(s, indent + 1))
    lines.append(pad + "}")
    return lines


def _stmt(s: A.Stmt, indent: int) -> list[str]:
    pad = "    " * indent
    if isinstance(s, A.Block):
        return _block(s, indent)
    if isinstance(s, A.If):
        out = [f"{pad}if ({expr_text(s.cond)})"] + _block(s.then, indent)
        if s.orelse is not None:
            out += [f"{pad}else"] + _block(s.orelse, indent)
        return out
    if isinstance(s, A.While):
        return [f"{pad}while ({expr_text(s.cond)})"] + _block(s.body, indent)
    if isinstance(s, A.For):
        init = simple_stmt_text(s.init) if s.init is not None else ""
        cond = expr_text(s.cond) if s.cond is not None else ""
        post = simple_stmt_text(s.post) if s.post is not None else ""
        return [f"{pad}for ({init}; {cond}; {post})"] + _block(s.body, indent)
    return [f"{pad}{simple_stmt_text(s)};"]


def _params(ps: list[A.Param]) -> str:
    parts = []
    for p in ps:
        text = str(p.var_type)
        if p.location:
            text += f" {p.location}"
        if p.name:
            text += f" {p.name}"
        parts.append(text)
    return ", ".join(parts)


def function_text(fn: A.FunctionAst, indent: int = 0) -> str:
    pad = "    " * indent
    head = f"{pad}function {fn.name}({_params(fn.params)})"
    if fn.visibility:
        head += f" {fn.visibility}"
    if fn.mutability != "default":
        head += f" {fn.mutability}"
    if fn.returns:
        head += f" returns ({_params(fn.returns)})"
    return "\n".join([head] + _block(fn.body, indent))


def pretty_print(contract: A.ContractAst) -> str:
    lines = [f"pragma {p};" for p in contract.pragmas]
    if contract.name == "":
        lines += [function_text(fn) for fn in contract.functions]
        return "\n".join(lines) + "\n"
    lines.append(f"contract {contract.name} {{")
    for sd in contract.structs:
        lines.append(f"    struct {sd.name} {{")
        lines += [f"        {ft} {fn};" for fn, ft in sd.fields]
        lines.append("    }")
    for sv in contract.state_vars:
        text = f"    {sv.var_type}"
        if sv.visibility:
            text += f" {sv.visibility}"
        if sv.constant:
            text += " constant"
        text += f" {sv.name}"
        if sv.init is not None:
            text += f" = {expr_text(sv.init)}"
        lines.append(text + ";")
    for fn in contract.functions:
        lines.append(function_text(fn, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"
