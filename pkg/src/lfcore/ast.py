"""Abstract syntax: kinds, types, expressions, templates, modules, packages.

All nodes are frozen dataclasses. Source spans ride along on nodes but are
excluded from equality and hashing, so re-parsed ASTs compare equal.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from functools import cached_property

from .errors import Span
from .values import LitValue


def _span():
    return field(default=None, compare=False, repr=False)


NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_:.-]*$")


# --- kinds -------------------------------------------------------------------


@dataclass(frozen=True)
class Star:
    def __str__(self) -> str:
        return "*"


STAR = Star()


@dataclass(frozen=True)
class KArrow:
    param: Kind
    result: Kind

    def __str__(self) -> str:
        left = f"({self.param})" if isinstance(self.param, KArrow) else str(self.param)
        return f"{left} -> {self.result}"


Kind = Star | KArrow


def kind_arrows(params: list[Kind], result: Kind) -> Kind:
    for k in reversed(params):
        result = KArrow(k, result)
    return result


# --- names -------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class QualifiedName:
    """``package/Module:name``; ``package`` is None only in scenario scripts
    before resolution against the loaded package set."""

    package: str | None
    module: str
    name: str

    def __str__(self) -> str:
        base = f"{self.module}:{self.name}"
        return f"{self.package}/{base}" if self.package else base

    @classmethod
    def parse(cls, text: str) -> QualifiedName:
        package, _, rest = text.rpartition("/")
        module, sep, name = rest.partition(":")
        if not sep:
            raise ValueError(f"not a qualified name: {text!r}")
        return cls(package or None, module, name)


# --- types -------------------------------------------------------------------

PRIM_KINDS: dict[str, Kind] = {
    "Unit": STAR,
    "Bool": STAR,
    "Int64": STAR,
    "Decimal": STAR,
    "Text": STAR,
    "Date": STAR,
    "Timestamp": STAR,
    "Party": STAR,
    "List": KArrow(STAR, STAR),
    "ContractId": KArrow(STAR, STAR),
    "Update": KArrow(STAR, STAR),
}


@dataclass(frozen=True)
class TVar:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class FunArrow:
    span: Span | None = _span()


@dataclass(frozen=True)
class Forall:
    var: str
    kind: Kind
    body: Type
    span: Span | None = _span()


@dataclass(frozen=True)
class TApp:
    fun: Type
    arg: Type
    span: Span | None = _span()


@dataclass(frozen=True)
class Prim:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Named:
    ref: QualifiedName
    span: Span | None = _span()


Type = TVar | FunArrow | Forall | TApp | Prim | Named

UNIT_T = Prim("Unit")
BOOL_T = Prim("Bool")
INT64_T = Prim("Int64")
DECIMAL_T = Prim("Decimal")
TEXT_T = Prim("Text")
DATE_T = Prim("Date")
TIMESTAMP_T = Prim("Timestamp")
PARTY_T = Prim("Party")


def fn(arg: Type, result: Type) -> Type:
    return TApp(TApp(FunArrow(), arg), result)


def fns(*types: Type) -> Type:
    """Right-nested arrow: fns(a, b, c) is a => (b => c)."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = fn(t, result)
    return result


def list_of(t: Type) -> Type:
    return TApp(Prim("List"), t)


def contract_id_of(t: Type) -> Type:
    return TApp(Prim("ContractId"), t)


def update_of(t: Type) -> Type:
    return TApp(Prim("Update"), t)


def apply_type(head: Type, args) -> Type:
    for a in args:
        head = TApp(head, a)
    return head


def unapply(t: Type) -> tuple[Type, list[Type]]:
    """Split a type application spine into its head and arguments."""
    args: list[Type] = []
    while isinstance(t, TApp):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def as_fun(t: Type) -> tuple[Type, Type] | None:
    head, args = unapply(t)
    if isinstance(head, FunArrow) and len(args) == 2:
        return args[0], args[1]
    return None


def free_type_vars(t: Type) -> set[str]:
    match t:
        case TVar(name):
            return {name}
        case Forall(var, _, body):
            return free_type_vars(body) - {var}
        case TApp(f, a):
            return free_type_vars(f) | free_type_vars(a)
    return set()


def _fresh(base: str, avoid: set[str]) -> str:
    stem = base.rstrip("0123456789").rstrip("_") or "t"
    for i in itertools.count(1):
        candidate = f"{stem}_{i}"
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


def substitute_type(body: Type, var: str, replacement: Type) -> Type:
    """Capture-avoiding ``body[var := replacement]``."""
    return substitute_types(body, {var: replacement})


def substitute_types(body: Type, mapping: dict[str, Type]) -> Type:
    if not mapping:
        return body
    match body:
        case TVar(name):
            return mapping.get(name, body)
        case TApp(f, a):
            return TApp(substitute_types(f, mapping), substitute_types(a, mapping), body.span)
        case Forall(var, kind, inner):
            mapping = {k: v for k, v in mapping.items() if k != var}
            if not mapping:
                return body
            incoming: set[str] = set()
            for k, v in mapping.items():
                if k in free_type_vars(inner):
                    incoming |= free_type_vars(v)
            if var in incoming:
                new_var = _fresh(var, incoming | free_type_vars(inner) | set(mapping))
                inner = substitute_types(inner, {var: TVar(new_var)})
                var = new_var
            return Forall(var, kind, substitute_types(inner, mapping), body.span)
    return body


def alpha_equal(a: Type, b: Type) -> bool:
    return _alpha_eq(a, b, {}, {}, 0)


def _alpha_eq(a: Type, b: Type, env_a: dict, env_b: dict, depth: int) -> bool:
    match a, b:
        case TVar(x), TVar(y):
            if x in env_a or y in env_b:
                return env_a.get(x) == env_b.get(y)
            return x == y
        case FunArrow(), FunArrow():
            return True
        case Prim(x), Prim(y):
            return x == y
        case Named(x), Named(y):
            return x == y
        case TApp(f1, a1), TApp(f2, a2):
            return _alpha_eq(f1, f2, env_a, env_b, depth) and _alpha_eq(a1, a2, env_a, env_b, depth)
        case Forall(v1, k1, b1), Forall(v2, k2, b2):
            if k1 != k2:
                return False
            return _alpha_eq(b1, b2, {**env_a, v1: depth}, {**env_b, v2: depth}, depth + 1)
    return False


# --- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Lam:
    var: str
    annot: Type
    body: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class App:
    fun: Expr
    arg: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class TyLam:
    var: str
    kind: Kind
    body: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class TyApp:
    fun: Expr
    arg: Type
    span: Span | None = _span()


@dataclass(frozen=True)
class Lit:
    value: LitValue
    span: Span | None = _span()


@dataclass(frozen=True)
class Builtin:
    name: str
    type_args: tuple[Type, ...]
    args: tuple[Expr, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class RecCon:
    ref: QualifiedName
    type_args: tuple[Type, ...]
    fields: tuple[tuple[str, Expr], ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class RecProj:
    ref: QualifiedName
    field: str
    arg: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class RecUpd:
    ref: QualifiedName
    field: str
    record: Expr
    value: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class VarCon:
    ref: QualifiedName
    type_args: tuple[Type, ...]
    variant: str
    arg: Expr
    span: Span | None = _span()


# case patterns


@dataclass(frozen=True)
class PDefault:
    pass


@dataclass(frozen=True)
class PUnit:
    pass


@dataclass(frozen=True)
class PBool:
    value: bool


@dataclass(frozen=True)
class PNil:
    pass


@dataclass(frozen=True)
class PCons:
    head: str
    tail: str


@dataclass(frozen=True)
class PVariant:
    ref: QualifiedName
    variant: str
    binder: str


Pattern = PDefault | PUnit | PBool | PNil | PCons | PVariant


@dataclass(frozen=True)
class Alt:
    pattern: Pattern
    body: Expr


@dataclass(frozen=True)
class Case:
    scrutinee: Expr
    alts: tuple[Alt, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class ValRef:
    ref: QualifiedName
    span: Span | None = _span()


@dataclass(frozen=True)
class UpdatePure:
    type: Type
    expr: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class UpdateBind:
    var: str
    type: Type
    bound: Expr
    body: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class UpdateCreate:
    template: QualifiedName
    arg: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class UpdateFetch:
    template: QualifiedName
    cid: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class UpdateExercise:
    template: QualifiedName
    choice: str
    cid: Expr
    arg: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class CidLeq:
    type: Type
    lhs: Expr
    rhs: Expr
    span: Span | None = _span()


Expr = (
    Var | Lam | App | TyLam | TyApp | Lit | Builtin | RecCon | RecProj | RecUpd | VarCon |
    Case | ValRef | UpdatePure | UpdateBind | UpdateCreate | UpdateFetch | UpdateExercise |
    CidLeq
)


def nil(t: Type) -> Expr:
    return Builtin("NIL", (t,), ())


def list_expr(t: Type, items) -> Expr:
    result = nil(t)
    for item in reversed(list(items)):
        result = Builtin("CONS", (t,), (item, result))
    return result


def is_empty_list_literal(e: Expr) -> bool:
    return isinstance(e, Builtin) and e.name == "NIL"


# --- definitions ---------------------------------------------------------------

TypeParams = tuple[tuple[str, Kind], ...]


@dataclass(frozen=True)
class RecordDef:
    name: str
    params: TypeParams
    fields: tuple[tuple[str, Type], ...]
    span: Span | None = _span()

    def kind(self) -> Kind:
        return kind_arrows([k for _, k in self.params], STAR)


@dataclass(frozen=True)
class VariantDef:
    name: str
    params: TypeParams
    constructors: tuple[tuple[str, Type], ...]
    span: Span | None = _span()

    def kind(self) -> Kind:
        return kind_arrows([k for _, k in self.params], STAR)


@dataclass(frozen=True)
class ValueDef:
    name: str
    type: Type
    body: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class ChoiceDef:
    name: str
    consuming: bool
    arg_var: str
    arg_type: Type
    result_type: Type
    controllers: Expr
    observers: Expr
    body: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class TemplateDef:
    """A template; its contract argument is the same-named record of the module.

    ``choices`` holds only user-written choices; ``all_choices`` adds the
    synthesized ``Archive``.
    """

    name: str
    param: str
    ensure: Expr
    signatories: Expr
    observers: Expr
    choices: tuple[ChoiceDef, ...]
    span: Span | None = _span()

    def all_choices(self) -> tuple[ChoiceDef, ...]:
        if any(c.name == "Archive" for c in self.choices):
            return self.choices
        return self.choices + (synthesize_archive(self),)

    def choice(self, name: str) -> ChoiceDef | None:
        for c in self.all_choices():
            if c.name == name:
                return c
        return None


def synthesize_archive(t: TemplateDef) -> ChoiceDef:
    """The implicit consuming ``Archive`` choice controlled by the signatories."""
    return ChoiceDef(
        name="Archive",
        consuming=True,
        arg_var="_",
        arg_type=UNIT_T,
        result_type=UNIT_T,
        controllers=t.signatories,
        observers=nil(PARTY_T),
        body=UpdatePure(UNIT_T, Lit(_unit())),
    )


def _unit():
    from .values import UNIT

    return UNIT


def _by_name(items) -> tuple:
    return tuple(sorted(items, key=lambda d: d.name))


@dataclass(frozen=True)
class Module:
    name: str
    records: tuple[RecordDef, ...] = ()
    variants: tuple[VariantDef, ...] = ()
    values: tuple[ValueDef, ...] = ()
    templates: tuple[TemplateDef, ...] = ()
    span: Span | None = _span()

    def canonical(self) -> Module:
        """Same module with definitions (and choices) in sorted order."""
        return replace(
            self,
            records=_by_name(self.records),
            variants=_by_name(self.variants),
            values=_by_name(self.values),
            templates=tuple(replace(t, choices=_by_name(t.choices)) for t in _by_name(self.templates)),
        )

    def definition_names(self) -> list[str]:
        return [d.name for d in itertools.chain(self.records, self.variants, self.values, self.templates)]


@dataclass(frozen=True)
class Package:
    name: str
    modules: tuple[Module, ...]
    span: Span | None = _span()

    def canonical(self) -> Package:
        return replace(self, modules=tuple(m.canonical() for m in _by_name(self.modules)))

    @cached_property
    def id(self) -> str:
        from .packages import hash_package

        return hash_package(self)

    def module(self, name: str) -> Module | None:
        for m in self.modules:
            if m.name == name:
                return m
        return None
