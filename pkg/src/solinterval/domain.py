"""Value lattice: intervals over extended integers, three-valued booleans,
and composite values (structs, arrays, mappings) built recursively on top.

Bounds are Python ints or the float infinities ``NEG_INF``/``POS_INF``.
Helpers below never let an infinity meet a huge int in float arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Union

from .frontend import ast as A

NEG_INF = -math.inf
POS_INF = math.inf

Bound = Union[int, float]


class TypeMismatch(Exception):
    pass


# ---------------------------------------------------------------------------
# extended-integer arithmetic
# ---------------------------------------------------------------------------

def _is_inf(x: Bound) -> bool:
    return isinstance(x, float)


def _add(a: Bound, b: Bound) -> Bound:
    if _is_inf(a) or _is_inf(b):
        if _is_inf(a) and _is_inf(b) and a != b:
            raise ArithmeticError("inf - inf")
        return a if _is_inf(a) else b
    return a + b


def _neg(a: Bound) -> Bound:
    return -a


def _mul(a: Bound, b: Bound) -> Bound:
    # 0 * inf = 0: an infinite bound is never attained
    if a == 0 or b == 0:
        return 0
    if _is_inf(a) or _is_inf(b):
        return POS_INF if (a > 0) == (b > 0) else NEG_INF
    return a * b


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def tmod(a: int, b: int) -> int:
    """Remainder with the sign of the dividend."""
    return a - b * tdiv(a, b)


def _bound_div(a: Bound, b: Bound) -> Bound:
    """a / b for a bound over a non-zero divisor bound, truncating toward zero."""
    if _is_inf(b):
        if _is_inf(a):
            raise ArithmeticError("inf / inf")
        return 0
    if _is_inf(a):
        return a if b > 0 else -a
    return tdiv(a, b)


# ---------------------------------------------------------------------------
# numeric intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: Bound = POS_INF
    hi: Bound = NEG_INF

    @staticmethod
    def of(lo: Bound, hi: Bound) -> "Interval":
        if lo > hi:
            return EMPTY
        return Interval(lo, hi)

    @staticmethod
    def const(v: int) -> "Interval":
        return Interval(v, v)

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def is_const(self) -> bool:
        return not self.empty and self.lo == self.hi

    def __contains__(self, v) -> bool:
        return not self.empty and self.lo <= v <= self.hi

    def __str__(self) -> str:
        if self.empty:
            return "empty"
        return f"({_bound_text(self.lo)},{_bound_text(self.hi)})"


EMPTY = Interval()
TOP = Interval(NEG_INF, POS_INF)
NON_NEGATIVE = Interval(0, POS_INF)


def _bound_text(b: Bound) -> str:
    if b == POS_INF:
        return "inf"
    if b == NEG_INF:
        return "-inf"
    return str(b)


def iv_join(a: Interval, b: Interval) -> Interval:
    if a.empty:
        return b
    if b.empty:
        return a
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def iv_widen(a: Interval, b: Interval) -> Interval:
    """Keep a bound of ``a`` when it already covers ``b``, else jump to infinity."""
    if a.empty:
        return b
    if b.empty:
        return a
    lo = a.lo if a.lo <= b.lo else NEG_INF
    hi = a.hi if a.hi >= b.hi else POS_INF
    return Interval(lo, hi)


def iv_meet(a: Interval, b: Interval) -> Interval:
    if a.empty or b.empty:
        return EMPTY
    return Interval.of(max(a.lo, b.lo), min(a.hi, b.hi))


def iv_leq(a: Interval, b: Interval) -> bool:
    if a.empty:
        return True
    if b.empty:
        return False
    return b.lo <= a.lo and a.hi <= b.hi


def _hull(points) -> Interval:
    pts = list(points)
    return Interval(min(pts), max(pts))


def _div_positive(x: Interval, lo: Bound, hi: Bound) -> Interval:
    """x / y for y in [lo, hi] with 1 <= lo."""
    parts = []
    if x.hi >= 0:
        a, b = max(x.lo, 0), x.hi
        parts.append(Interval(_bound_div(a, hi), _bound_div(b, lo)))
    if x.lo < 0:
        a, b = x.lo, min(x.hi, -1)
        parts.append(Interval(_bound_div(a, lo), _bound_div(b, hi)))
    out = EMPTY
    for p in parts:
        out = iv_join(out, p)
    return out


def _iv_div(x: Interval, y: Interval) -> Interval:
    out = EMPTY
    if y.hi >= 1:
        out = iv_join(out, _div_positive(x, max(y.lo, 1), y.hi))
    if y.lo <= -1:
        pos = _div_positive(x, -min(y.hi, -1), -y.lo)
        out = iv_join(out, Interval(_neg(pos.hi), _neg(pos.lo)))
    return out


def _iv_mod(x: Interval, y: Interval) -> Interval:
    if x.is_const() and y.is_const():
        return Interval.const(tmod(x.lo, y.lo))
    # |r| < |y| and |r| <= |x|; sign follows x
    ymag = max(abs(y.lo), abs(y.hi))
    ymin = min(abs(b) for b in (y.lo, y.hi)) if (y.lo > 0 or y.hi < 0) else 1
    if x.lo >= 0 and x.hi < ymin:
        return x
    cap = ymag - 1 if not _is_inf(ymag) else POS_INF
    out = EMPTY
    if x.hi >= 0:
        out = iv_join(out, Interval(0, min(x.hi, cap)))
    if x.lo < 0:
        out = iv_join(out, Interval(max(x.lo, -cap), 0))
    return out


def iv_arith(op: str, a: Interval, b: Interval,
             result_type: Optional[A.MiniSolType] = None) -> tuple[Interval, set[str]]:
    """Abstract ``a op b``; returns the result and warning flags.

    Unsigned results are met with [0, inf]: a negative outcome would
    revert under checked arithmetic.
    """
    flags: set[str] = set()
    if a.empty or b.empty:
        return EMPTY, flags
    if op == "+":
        r = Interval(_add(a.lo, b.lo), _add(a.hi, b.hi))
    elif op == "-":
        r = Interval(_add(a.lo, _neg(b.hi)), _add(a.hi, _neg(b.lo)))
    elif op == "*":
        r = _hull(_mul(p, q) for p in (a.lo, a.hi) for q in (b.lo, b.hi))
    elif op in ("/", "%"):
        if 0 in b:
            flags.add("DivByZeroPossible")
            if b.lo == 0 and b.hi == 0:
                return EMPTY, flags
        r = _iv_div(a, b) if op == "/" else _iv_mod(a, b)
    else:
        raise ValueError(f"unknown arithmetic operator {op}")
    if isinstance(result_type, (A.UIntType, A.AddressType)):
        r = iv_meet(r, NON_NEGATIVE)
    return r, flags


# ---------------------------------------------------------------------------
# booleans
# ---------------------------------------------------------------------------

class BoolApprox(Enum):
    EMPTY = "empty"
    FALSE = "[0,0]"
    TRUE = "[1,1]"
    UNKNOWN = "[01]"

    def __str__(self) -> str:
        return self.value

    @staticmethod
    def of(value: bool) -> "BoolApprox":
        return BoolApprox.TRUE if value else BoolApprox.FALSE

    def may_be(self, value: bool) -> bool:
        return self is BoolApprox.UNKNOWN or self is BoolApprox.of(value)


def bool_join(a: BoolApprox, b: BoolApprox) -> BoolApprox:
    if a is BoolApprox.EMPTY:
        return b
    if b is BoolApprox.EMPTY or a is b:
        return a
    return BoolApprox.UNKNOWN


def bool_meet(a: BoolApprox, b: BoolApprox) -> BoolApprox:
    if a is BoolApprox.UNKNOWN:
        return b
    if b is BoolApprox.UNKNOWN or a is b:
        return a
    return BoolApprox.EMPTY


def bool_leq(a: BoolApprox, b: BoolApprox) -> bool:
    return a is BoolApprox.EMPTY or b is BoolApprox.UNKNOWN or a is b


def iv_cmp(op: str, a: Interval, b: Interval) -> BoolApprox:
    if a.empty or b.empty:
        return BoolApprox.EMPTY
    if op == ">":
        return iv_cmp("<", b, a)
    if op == ">=":
        return iv_cmp("<=", b, a)
    if op == "<":
        if a.hi < b.lo:
            return BoolApprox.TRUE
        if a.lo >= b.hi:
            return BoolApprox.FALSE
    elif op == "<=":
        if a.hi <= b.lo:
            return BoolApprox.TRUE
        if a.lo > b.hi:
            return BoolApprox.FALSE
    elif op == "==":
        if a.is_const() and b.is_const() and a.lo == b.lo:
            return BoolApprox.TRUE
        if iv_meet(a, b).empty:
            return BoolApprox.FALSE
    elif op == "!=":
        return bool_op("not", iv_cmp("==", a, b))
    else:
        raise ValueError(f"unknown comparison {op}")
    return BoolApprox.UNKNOWN


def bool_op(op: str, *operands: BoolApprox) -> BoolApprox:
    """Kleene three-valued logic; EMPTY is absorbing."""
    if any(o is BoolApprox.EMPTY for o in operands):
        return BoolApprox.EMPTY
    if op == "not":
        (a,) = operands
        if a is BoolApprox.UNKNOWN:
            return a
        return BoolApprox.of(a is BoolApprox.FALSE)
    a, b = operands
    if op == "and":
        if BoolApprox.FALSE in (a, b):
            return BoolApprox.FALSE
        if a is BoolApprox.TRUE and b is BoolApprox.TRUE:
            return BoolApprox.TRUE
        return BoolApprox.UNKNOWN
    if op == "or":
        if BoolApprox.TRUE in (a, b):
            return BoolApprox.TRUE
        if a is BoolApprox.FALSE and b is BoolApprox.FALSE:
            return BoolApprox.FALSE
        return BoolApprox.UNKNOWN
    raise ValueError(f"unknown boolean operator {op}")


# ---------------------------------------------------------------------------
# composites
# ---------------------------------------------------------------------------

Key = Union[int, str]


@dataclass(frozen=True)
class CompositeValue:
    """Key -> value map for a struct, array or mapping.

    ``default`` is the value of any key outside ``items`` (array slots or
    mapping cells never written on this path).  ``length`` is tracked
    for arrays.  ``bottom`` marks a local that has not been declared yet.
    """

    kind: str                      # "struct" | "array" | "mapping"
    items: Mapping[Key, "Value"] = field(default_factory=dict)
    default: Optional["Value"] = None
    fixed_length: Optional[int] = None
    length: Interval = EMPTY
    bottom: bool = False

    def keys(self):
        return sorted(self.items, key=_key_order)

    def __str__(self) -> str:
        if self.bottom:
            return "empty"
        inner = ", ".join(f"{_key_text(k)}: {value_text(self.items[k])}" for k in self.keys())
        return "{" + inner + "}"

    def with_item(self, key: Key, value: "Value") -> "CompositeValue":
        items = dict(self.items)
        items[key] = value
        return CompositeValue(self.kind, items, self.default, self.fixed_length, self.length)


def _key_order(k: Key):
    return (isinstance(k, str), k)


def _key_text(k: Key) -> str:
    return display_name(k) if isinstance(k, str) else str(k)


def display_name(text: str) -> str:
    """Drop SSA version suffixes (``x@2`` -> ``x``)."""
    out, i = [], 0
    while i < len(text):
        if text[i] == "@":
            i += 1
            while i < len(text) and text[i].isdigit():
                i += 1
            continue
        out.append(text[i])
        i += 1
    return "".join(out)


Value = Union[Interval, BoolApprox, CompositeValue]


def _check_same_shape(a: CompositeValue, b: CompositeValue) -> None:
    if a.kind != b.kind or a.fixed_length != b.fixed_length:
        raise TypeMismatch(f"cannot combine {a.kind} with {b.kind}")


def comp_join(a: CompositeValue, b: CompositeValue, widen: bool = False) -> CompositeValue:
    if a.bottom:
        return b
    if b.bottom:
        return a
    _check_same_shape(a, b)
    items: dict[Key, Value] = {}
    for k in set(a.items) | set(b.items):
        if k in a.items and k in b.items:
            items[k] = value_join(a.items[k], b.items[k], widen)
        else:
            items[k] = a.items[k] if k in a.items else b.items[k]
    default = a.default if b.default is None else (
        b.default if a.default is None else value_join(a.default, b.default, widen))
    length = iv_widen(a.length, b.length) if widen else iv_join(a.length, b.length)
    return CompositeValue(a.kind, items, default, a.fixed_length, length)


def comp_meet(a: CompositeValue, b: CompositeValue) -> CompositeValue:
    if a.bottom:
        return a
    if b.bottom:
        return b
    _check_same_shape(a, b)
    items = {k: value_meet(a.items[k], b.items[k]) for k in set(a.items) & set(b.items)}
    default = a.default if b.default is None else (
        b.default if a.default is None else value_meet(a.default, b.default))
    return CompositeValue(a.kind, items, default, a.fixed_length, iv_meet(a.length, b.length))


def comp_leq(a: CompositeValue, b: CompositeValue) -> bool:
    if a.bottom:
        return True
    if b.bottom:
        return False
    _check_same_shape(a, b)
    if not set(a.items) <= set(b.items):
        return False
    if not all(value_leq(a.items[k], b.items[k]) for k in a.items):
        return False
    if a.default is not None and b.default is not None and not value_leq(a.default, b.default):
        return False
    return iv_leq(a.length, b.length)


def value_join(a: Value, b: Value, widen: bool = False) -> Value:
    if isinstance(a, Interval) and isinstance(b, Interval):
        return iv_widen(a, b) if widen else iv_join(a, b)
    if isinstance(a, BoolApprox) and isinstance(b, BoolApprox):
        return bool_join(a, b)
    if isinstance(a, CompositeValue) and isinstance(b, CompositeValue):
        return comp_join(a, b, widen)
    raise TypeMismatch(f"cannot join {a!r} and {b!r}")


def value_meet(a: Value, b: Value) -> Value:
    if isinstance(a, Interval) and isinstance(b, Interval):
        return iv_meet(a, b)
    if isinstance(a, BoolApprox) and isinstance(b, BoolApprox):
        return bool_meet(a, b)
    if isinstance(a, CompositeValue) and isinstance(b, CompositeValue):
        return comp_meet(a, b)
    raise TypeMismatch(f"cannot meet {a!r} and {b!r}")


def value_leq(a: Value, b: Value) -> bool:
    if isinstance(a, Interval) and isinstance(b, Interval):
        return iv_leq(a, b)
    if isinstance(a, BoolApprox) and isinstance(b, BoolApprox):
        return bool_leq(a, b)
    if isinstance(a, CompositeValue) and isinstance(b, CompositeValue):
        return comp_leq(a, b)
    raise TypeMismatch(f"cannot compare {a!r} and {b!r}")


def value_text(v: Value) -> str:
    return str(v)


# ---------------------------------------------------------------------------
# defaults
# ---------------------------------------------------------------------------

BUILTIN_INTERVAL = Interval(1, POS_INF)


def default_for(t: A.MiniSolType, origin: str = "parameter") -> Value:
    """Extremal value of a variable of type ``t``.

    ``origin`` is one of parameter, state, local, builtin.  Builtin
    numerics start at 1; locals use Solidity's zero initialisation.
    """
    zero = origin == "local"
    if isinstance(t, (A.UIntType, A.AddressType)):
        if origin == "builtin":
            return BUILTIN_INTERVAL
        return Interval(0, 0) if zero else NON_NEGATIVE
    if isinstance(t, A.IntType):
        return Interval(0, 0) if zero else TOP
    if isinstance(t, A.BoolType):
        return BoolApprox.FALSE if zero else BoolApprox.UNKNOWN
    if isinstance(t, A.StructType):
        items = {name: default_for(ft, origin) for name, ft in t.fields}
        return CompositeValue("struct", items)
    if isinstance(t, A.ArrayType):
        elem = default_for(t.element, origin)
        if t.length is not None:
            return CompositeValue("array", {i: elem for i in range(t.length)}, elem,
                                  t.length, Interval.const(t.length))
        return CompositeValue("array", {}, elem, None, Interval(0, 0) if zero else NON_NEGATIVE)
    if isinstance(t, A.MappingType):
        return CompositeValue("mapping", {}, default_for(t.value, origin))
    if isinstance(t, A.StringType):
        return TOP
    raise TypeError(f"no default for {t}")


def bottom_for(t: A.MiniSolType) -> Value:
    if isinstance(t, A.BoolType):
        return BoolApprox.EMPTY
    if A.is_composite(t):
        kind = "struct" if isinstance(t, A.StructType) else (
            "array" if isinstance(t, A.ArrayType) else "mapping")
        fixed = t.length if isinstance(t, A.ArrayType) else None
        return CompositeValue(kind, {}, None, fixed, EMPTY, bottom=True)
    return EMPTY


def is_default(v: Value, t: A.MiniSolType, origin: str) -> bool:
    return v == default_for(t, origin)
