"""Assembly of a satisfiability query from an analysis state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..cfg import Cfg
from ..domain import Interval, default_for
from ..engine import AnalysisInfo, cell_value, constraint_order
from ..frontend import ast as A
from ..symbolic import Expr, Ref, VarId, refs


class EncodeError(Exception):
    pass


@dataclass(frozen=True)
class Decl:
    var: VarId
    sort: str            # "int" | "bool"
    unsigned: bool = False


@dataclass(frozen=True)
class SatQuery:
    declarations: tuple[Decl, ...] = ()
    # interval facts for variables whose interval is not the type default
    bounds: tuple[tuple[VarId, Interval], ...] = ()
    # boolean temporaries and the comparison each one names
    definitions: tuple[tuple[VarId, Expr], ...] = ()
    # SSA definitions of numeric variables the definitions depend on
    equations: tuple[tuple[VarId, Expr], ...] = ()
    assertions: tuple[tuple[VarId, bool], ...] = ()

    def definition(self, symbol: VarId) -> Optional[Expr]:
        for v, e in self.definitions:
            if v == symbol:
                return e
        return None

    @property
    def infeasible(self) -> bool:
        return any(iv.empty for _, iv in self.bounds)


def cell_type(cfg: Cfg, var: VarId) -> Optional[A.MiniSolType]:
    sym = cfg.symbols.get(var.name)
    if sym is None:
        return None
    t = sym.type
    for text in var.path:
        if text.startswith("."):
            if isinstance(t, A.ArrayType) and text == ".length":
                t = A.UIntType()
            elif isinstance(t, A.StructType):
                t = t.field_type(text[1:])
            else:
                return None
        elif isinstance(t, A.ArrayType):
            t = t.element
        elif isinstance(t, A.MappingType):
            t = t.value
        else:
            return None
    return t


def type_default(t: A.MiniSolType, origin: str):
    return default_for(t, "builtin" if origin == "builtin" else "parameter")


def encode_state(info: AnalysisInfo, cfg: Cfg) -> SatQuery:
    """Collect flagged booleans, the numerics they mention, bounds and
    polarity assertions into a query."""
    constraints = sorted(info.con, key=constraint_order)
    definitions: dict[VarId, Expr] = {}
    for c in constraints:
        definitions[c.symbol] = c.expr
    for name in sorted(info.flags):
        sym = VarId(name, 0, "temporary")
        if sym not in definitions and name in info.exprs:
            definitions[sym] = info.exprs[name]

    seen: dict[VarId, Ref] = {}
    pending = []
    for e in definitions.values():
        pending.extend(refs(e).values())
    equations: dict[VarId, Expr] = {}
    while pending:
        r = pending.pop()
        if r.var in seen:
            continue
        seen[r.var] = r
        d = info.defs.get(r.var)
        if d is not None:
            equations[r.var] = d
            pending.extend(refs(d).values())

    decls = []
    bounds = []
    for var in sorted(seen, key=lambda v: v.smt_name):
        r = seen[var]
        # a temporary referenced without an expression stays a free symbol
        if var.origin == "temporary" and var in definitions:
            continue
        decls.append(Decl(var, r.sort, r.unsigned))
        if r.sort != "int":
            continue
        value = cell_value(info, cfg, var)
        t = cell_type(cfg, var)
        if not isinstance(value, Interval) or t is None:
            continue
        if value != type_default(t, var.origin):
            bounds.append((var, value))
    return SatQuery(
        tuple(decls), tuple(bounds),
        tuple(sorted(definitions.items(), key=lambda kv: kv[0].smt_name)),
        tuple(sorted(equations.items(), key=lambda kv: kv[0].smt_name)),
        tuple((c.symbol, c.polarity) for c in constraints),
    )
