"""Runtime values and suspended ledger updates.

Literal values double as the payload of ``Lit`` expression nodes, so the
parser, checker, and evaluator all share these classes.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from .errors import EvalError
from .numeric import Numeric

if TYPE_CHECKING:
    from .ast import Expr, QualifiedName, Type


@dataclass(frozen=True)
class UnitV:
    pass


UNIT = UnitV()


@dataclass(frozen=True)
class BoolV:
    value: bool


TRUE = BoolV(True)
FALSE = BoolV(False)


@dataclass(frozen=True)
class Int64V:
    value: int


@dataclass(frozen=True)
class DecimalV:
    value: Numeric


@dataclass(frozen=True)
class TextV:
    value: str


@dataclass(frozen=True)
class DateV:
    value: dt.date


@dataclass(frozen=True)
class TimestampV:
    value: dt.datetime  # UTC, microsecond precision


@dataclass(frozen=True)
class PartyV:
    name: str


@dataclass(frozen=True, order=True)
class ContractIdV:
    index: int

    def __str__(self) -> str:
        return f"#{self.index}"


@dataclass(frozen=True)
class ListV:
    items: tuple[Value, ...]


@dataclass(frozen=True)
class RecV:
    ref: QualifiedName
    fields: tuple[tuple[str, Value], ...]
    type_args: tuple[Type, ...] = field(default=(), compare=False)

    def get(self, name: str) -> Value:
        for fname, v in self.fields:
            if fname == name:
                return v
        raise EvalError(f"record {self.ref} has no field {name}")


@dataclass(frozen=True)
class VarV:
    ref: QualifiedName
    variant: str
    value: Value
    type_args: tuple[Type, ...] = field(default=(), compare=False)


@dataclass(eq=False)
class Closure:
    env: dict
    var: str
    body: Expr


@dataclass(eq=False)
class TyClosure:
    env: dict
    var: str
    body: Expr


# Suspended updates. All payloads are values; only bind keeps an expression.


@dataclass(frozen=True)
class UPure:
    type: Type
    value: Value


@dataclass(eq=False)
class UBind:
    var: str
    type: Type
    bound: UpdateV
    body: Expr
    env: dict


@dataclass(frozen=True)
class UCreate:
    template: QualifiedName
    arg: Value


@dataclass(frozen=True)
class UFetch:
    template: QualifiedName
    cid: ContractIdV


@dataclass(frozen=True)
class UExercise:
    template: QualifiedName
    choice: str
    cid: ContractIdV
    arg: Value


UpdateExpr = UPure | UBind | UCreate | UFetch | UExercise


@dataclass(eq=False)
class UpdateV:
    update: UpdateExpr


LitValue = UnitV | BoolV | Int64V | DecimalV | TextV | DateV | TimestampV | PartyV
LITERAL_TYPES = (UnitV, BoolV, Int64V, DecimalV, TextV, DateV, TimestampV, PartyV)

Value = (
    UnitV | BoolV | Int64V | DecimalV | TextV | DateV | TimestampV | PartyV | ContractIdV |
    ListV | RecV | VarV | Closure | TyClosure | UpdateV
)


def format_timestamp(ts: dt.datetime) -> str:
    text = ts.replace(microsecond=0).isoformat()
    if ts.microsecond:
        text += f".{ts.microsecond:06d}".rstrip("0")
    return text + "Z"


def parse_timestamp(text: str) -> dt.datetime:
    """Inverse of ``format_timestamp``; accepts 1 to 6 fractional digits."""
    base, _, frac = text.removesuffix("Z").partition(".")
    ts = dt.datetime.fromisoformat(base)
    return ts.replace(microsecond=int(frac.ljust(6, "0"))) if frac else ts


def render_value(v: Value) -> str:
    """Compact human-readable rendering used in transaction trees."""
    match v:
        case UnitV():
            return "()"
        case BoolV(b):
            return "true" if b else "false"
        case Int64V(n):
            return str(n)
        case DecimalV(d):
            return str(d)
        case TextV(s):
            return json.dumps(s, ensure_ascii=False)
        case DateV(d):
            return d.isoformat()
        case TimestampV(ts):
            return format_timestamp(ts)
        case PartyV(name):
            return name
        case ContractIdV():
            return str(v)
        case ListV(items):
            return "[" + ", ".join(render_value(x) for x in items) + "]"
        case RecV(ref, fields):
            inner = " ".join(render_value(x) for _, x in fields)
            return f"({ref.name} {inner})" if inner else f"({ref.name})"
        case VarV(_, variant, payload):
            return f"({variant} {render_value(payload)})"
        case Closure() | TyClosure():
            return "<closure>"
        case UpdateV():
            return "<update>"
    raise TypeError(f"not a value: {v!r}")


_RANK = {cls: i for i, cls in enumerate(LITERAL_TYPES + (ContractIdV, ListV, RecV, VarV))}


def compare_values(a: Value, b: Value) -> int:
    """Total structural order on first-order values; -1, 0 or 1."""
    if type(a) is not type(b):
        if type(a) in _RANK and type(b) in _RANK:
            return -1 if _RANK[type(a)] < _RANK[type(b)] else 1
        raise EvalError("cannot compare functional values")
    match a:
        case UnitV():
            return 0
        case BoolV() | Int64V() | DecimalV() | TextV() | DateV() | TimestampV():
            x, y = a.value, b.value  # type: ignore[union-attr]
            return (x > y) - (x < y)
        case PartyV():
            return (a.name > b.name) - (a.name < b.name)  # type: ignore[union-attr]
        case ContractIdV():
            return (a.index > b.index) - (a.index < b.index)  # type: ignore[union-attr]
        case ListV():
            for x, y in zip(a.items, b.items):  # type: ignore[union-attr]
                c = compare_values(x, y)
                if c:
                    return c
            n, m = len(a.items), len(b.items)  # type: ignore[union-attr]
            return (n > m) - (n < m)
        case RecV():
            for (_, x), (_, y) in zip(a.fields, b.fields):  # type: ignore[union-attr]
                c = compare_values(x, y)
                if c:
                    return c
            return 0
        case VarV():
            if a.variant != b.variant:  # type: ignore[union-attr]
                return -1 if a.variant < b.variant else 1  # type: ignore[union-attr]
            return compare_values(a.value, b.value)  # type: ignore[union-attr]
    raise EvalError("cannot compare functional values")


def value_to_json(v: Value) -> Any:
    """Tagged JSON encoding of a first-order value."""
    match v:
        case UnitV():
            return {"unit": None}
        case BoolV(b):
            return {"bool": b}
        case Int64V(n):
            return {"int64": str(n)}
        case DecimalV(d):
            return {"decimal": str(d)}
        case TextV(s):
            return {"text": s}
        case DateV(d):
            return {"date": d.isoformat()}
        case TimestampV(ts):
            return {"timestamp": format_timestamp(ts)}
        case PartyV(name):
            return {"party": name}
        case ContractIdV(i):
            return {"cid": i}
        case ListV(items):
            return {"list": [value_to_json(x) for x in items]}
        case RecV(ref, fields):
            return {"record": str(ref), "fields": [[n, value_to_json(x)] for n, x in fields]}
        case VarV(ref, variant, payload):
            return {"variant": str(ref), "constructor": variant, "value": value_to_json(payload)}
    raise EvalError("functional values have no JSON encoding")


def value_from_json(obj: Any) -> Value:
    from .ast import QualifiedName

    (tag,) = [k for k in obj if k not in ("fields", "constructor", "value")]
    payload = obj[tag]
    match tag:
        case "unit":
            return UNIT
        case "bool":
            return BoolV(payload)
        case "int64":
            return Int64V(int(payload))
        case "decimal":
            return DecimalV(Numeric.parse(payload))
        case "text":
            return TextV(payload)
        case "date":
            return DateV(dt.date.fromisoformat(payload))
        case "timestamp":
            return TimestampV(parse_timestamp(payload))
        case "party":
            return PartyV(payload)
        case "cid":
            return ContractIdV(payload)
        case "list":
            return ListV(tuple(value_from_json(x) for x in payload))
        case "record":
            return RecV(QualifiedName.parse(payload), tuple((n, value_from_json(x)) for n, x in obj["fields"]))
        case "variant":
            return VarV(QualifiedName.parse(payload), obj["constructor"], value_from_json(obj["value"]))
    raise ValueError(f"unknown value tag {tag!r}")
