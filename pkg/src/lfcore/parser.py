"""Canonical textual syntax: package/scenario parsing and pretty-printing.

Package files (``.lf``)::

    (package NAME (module NAME DEF...)...)

    DEF := (record NAME [(a KIND)...]? (field TYPE)...)
         | (variant NAME [(a KIND)...]? (Ctor TYPE)...)
         | (value NAME TYPE EXPR)
         | (template NAME this (ensure E)? (signatories E) (observers E)? CHOICE...)
    CHOICE := (choice NAME consuming|nonconsuming (x TYPE) TYPE
                 (controllers E) (observers E)? E)

Scenario files (``.lfs``) are a sequence of steps; see ``parse_scenario``.
References are ``Name`` (current module), ``Module:Name`` (current package) or
``package/Module:Name``.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

from . import builtins
from .ast import (
    NAME_RE,
    PARTY_T,
    PRIM_KINDS,
    STAR,
    Alt,
    App,
    Builtin,
    Case,
    ChoiceDef,
    CidLeq,
    Expr,
    Forall,
    FunArrow,
    KArrow,
    Kind,
    Lam,
    Lit,
    Module,
    Named,
    Package,
    PBool,
    PCons,
    PDefault,
    PNil,
    Prim,
    PUnit,
    PVariant,
    QualifiedName,
    RecCon,
    RecordDef,
    RecProj,
    RecUpd,
    Star,
    TApp,
    TemplateDef,
    TVar,
    TyApp,
    TyLam,
    Type,
    UpdateBind,
    UpdateCreate,
    UpdateExercise,
    UpdateFetch,
    UpdatePure,
    ValRef,
    ValueDef,
    Var,
    VarCon,
    VariantDef,
    list_expr,
    nil,
    unapply,
)
from .errors import ParseError, Span
from .numeric import INT64_MAX, INT64_MIN, Numeric
from .sexpr import Atom, Datum, SList, quote_string, read
from .values import (
    FALSE,
    TRUE,
    UNIT,
    BoolV,
    DateV,
    DecimalV,
    Int64V,
    PartyV,
    TextV,
    TimestampV,
    UnitV,
    format_timestamp,
    parse_timestamp,
)

EXPR_KEYWORDS = {
    "lam", "tlam", "@", "record", "get", "set", "variant", "case", "pure", "bind",
    "create", "fetch", "exercise", "cid_leq", "list",
}
RESERVED = EXPR_KEYWORDS | {
    "unit", "true", "false", "forall", "->", "_", "nil", "cons", "package", "module",
    "value", "template", "choice", "consuming", "nonconsuming", "ensure", "signatories",
    "observers", "controllers", "*",
} | set(PRIM_KINDS) | set(builtins.SIGNATURES)

VAR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
DEF_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
INT_RE = re.compile(r"^-?\d+$")
DEC_RE = re.compile(r"^-?\d+\.\d+$")
DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{1,6})?Z$")
CID_RE = re.compile(r"^#\d+$")


# --- scenario syntax ---------------------------------------------------------


@dataclass(frozen=True)
class CreateCommand:
    template: QualifiedName
    arg: Expr


@dataclass(frozen=True)
class ExerciseCommand:
    cid: Expr
    choice: str
    arg: Expr


Command = CreateCommand | ExerciseCommand


@dataclass(frozen=True)
class Submit:
    actors: tuple[str, ...]
    command: Command
    bind: str | None = None
    span: Span | None = None


@dataclass(frozen=True)
class SubmitMustFail:
    actors: tuple[str, ...]
    command: Command
    expected: str
    span: Span | None = None


@dataclass(frozen=True)
class AssertActive:
    cid_ref: str
    template: QualifiedName
    span: Span | None = None


@dataclass(frozen=True)
class AssertArchived:
    cid_ref: str
    span: Span | None = None


@dataclass(frozen=True)
class SketchNode:
    """Expected shape of a projected action; ``cid`` is a bind name, ``#n`` or ``_``."""

    kind: str  # Create | Exercise | Fetch
    cid: str
    template: QualifiedName
    choice: str | None = None
    children: tuple[SketchNode, ...] = ()


@dataclass(frozen=True)
class Project:
    party: str
    expected: tuple[SketchNode, ...]
    span: Span | None = None


Step = Submit | SubmitMustFail | AssertActive | AssertArchived | Project


@dataclass(frozen=True)
class Scenario:
    steps: tuple[Step, ...]


# --- parsing -----------------------------------------------------------------


def _err(d: Datum, msg: str, cls: str = "SyntaxError") -> ParseError:
    return ParseError(msg, d.span, error_class=cls)


def _is_sym(d: Datum, text: str | None = None) -> bool:
    return isinstance(d, Atom) and not d.is_string and (text is None or d.text == text)


def _head(d: Datum) -> str | None:
    if isinstance(d, SList) and not d.square and d.items and _is_sym(d.items[0]):
        return d.items[0].text
    return None


def _symbol(d: Datum, what: str, pattern: re.Pattern = DEF_RE) -> str:
    if not _is_sym(d) or not pattern.match(d.text):
        raise _err(d, f"expected {what}, got {d!r}")
    return d.text


def _binder(d: Datum, what: str = "variable name") -> str:
    name = _symbol(d, what, VAR_RE)
    if name in RESERVED and name != "_":
        raise _err(d, f"reserved word {name!r} cannot be bound")
    return name


def _party_name(d: Datum) -> str:
    text = d.text[1:] if _is_sym(d) and d.text.startswith("'") else getattr(d, "text", "")
    if not _is_sym(d) or not NAME_RE.match(text):
        raise _err(d, f"expected party name, got {d!r}")
    return text


class _Parser:
    def __init__(self, package: str | None, module: str | None):
        self.package = package
        self.module = module

    # refs

    def ref(self, d: Datum, what: str = "reference") -> QualifiedName:
        if not _is_sym(d):
            raise _err(d, f"expected {what}, got {d!r}")
        text = d.text
        if ":" in text:
            try:
                q = QualifiedName.parse(text)
            except ValueError:
                raise _err(d, f"malformed reference {text!r}") from None
            if not (DEF_RE.match(q.module) and DEF_RE.match(q.name)):
                raise _err(d, f"malformed reference {text!r}")
            return QualifiedName(q.package or self.package, q.module, q.name)
        if self.module is None:
            raise _err(d, f"reference {text!r} must be qualified as Module:Name", "UndefinedName")
        if not DEF_RE.match(text):
            raise _err(d, f"malformed reference {text!r}")
        return QualifiedName(self.package, self.module, text)

    # kinds and types

    def kind(self, d: Datum) -> Kind:
        if _is_sym(d, "*"):
            return STAR
        if _head(d) == "->":
            parts = d.items[1:]
            if len(parts) < 2:
                raise _err(d, "kind arrow needs at least two kinds", "ArityError")
            result = self.kind(parts[-1])
            for p in reversed(parts[:-1]):
                result = KArrow(self.kind(p), result)
            return result
        raise _err(d, f"expected kind, got {d!r}")

    def type_params(self, d: Datum) -> tuple[tuple[str, Kind], ...]:
        params = []
        for item in d.items:
            if not (isinstance(item, SList) and not item.square and len(item.items) == 2):
                raise _err(item, "type parameter must be (name KIND)")
            params.append((_binder(item.items[0], "type variable"), self.kind(item.items[1])))
        return tuple(params)

    def type(self, d: Datum, tvars: frozenset) -> Type:
        if isinstance(d, Atom):
            if d.is_string:
                raise _err(d, "expected type, got string")
            t = d.text
            if t in tvars:
                return TVar(t, d.span)
            if t in PRIM_KINDS:
                return Prim(t, d.span)
            if t == "->":
                return FunArrow(d.span)
            if t in RESERVED:
                raise _err(d, f"unexpected {t!r} in type")
            return Named(self.ref(d, "type"), d.span)
        if d.square or not d.items:
            raise _err(d, "expected type")
        head = _head(d)
        if head == "forall":
            if len(d.items) < 3:
                raise _err(d, "forall needs binders and a body", "ArityError")
            binders = []
            for b in d.items[1:-1]:
                if not (isinstance(b, SList) and not b.square and len(b.items) == 2):
                    raise _err(b, "forall binder must be (a KIND)")
                binders.append((_binder(b.items[0], "type variable"), self.kind(b.items[1])))
            inner = tvars | {v for v, _ in binders}
            body = self.type(d.items[-1], inner)
            for v, k in reversed(binders):
                body = Forall(v, k, body, d.span)
            return body
        if head == "->" and len(d.items) >= 3:
            parts = [self.type(p, tvars) for p in d.items[1:]]
            result = parts[-1]
            for p in reversed(parts[:-1]):
                result = TApp(TApp(FunArrow(d.items[0].span), p, d.span), result, d.span)
            return result
        if len(d.items) < 2:
            raise _err(d, "type application needs an argument", "ArityError")
        result = self.type(d.items[0], tvars)
        for a in d.items[1:]:
            result = TApp(result, self.type(a, tvars), d.span)
        return result

    def type_args(self, items: list, tvars: frozenset) -> tuple[tuple[Type, ...], list]:
        if items and isinstance(items[0], SList) and items[0].square:
            return tuple(self.type(t, tvars) for t in items[0].items), items[1:]
        return (), items

    # expressions

    def literal(self, d: Atom):
        t = d.text
        if t == "unit":
            return UNIT
        if t == "true":
            return TRUE
        if t == "false":
            return FALSE
        if t.startswith("'"):
            return PartyV(_party_name(d))
        if INT_RE.match(t):
            n = int(t)
            if not INT64_MIN <= n <= INT64_MAX:
                raise _err(d, f"Int64 literal out of range: {t}")
            return Int64V(n)
        if DEC_RE.match(t):
            try:
                return DecimalV(Numeric.parse(t))
            except (ValueError, ArithmeticError) as e:
                raise _err(d, f"bad Decimal literal {t}: {e}") from None
        if DATE_RE.match(t):
            try:
                return DateV(dt.date.fromisoformat(t))
            except ValueError:
                raise _err(d, f"bad date {t}") from None
        if TS_RE.match(t):
            try:
                return TimestampV(parse_timestamp(t))
            except ValueError:
                raise _err(d, f"bad timestamp {t}") from None
        return None

    def expr(self, d: Datum, tvars: frozenset, vars: frozenset) -> Expr:
        if isinstance(d, Atom):
            if d.is_string:
                return Lit(TextV(d.text), d.span)
            lit = self.literal(d)
            if lit is not None:
                return Lit(lit, d.span)
            t = d.text
            if t in vars:
                return Var(t, d.span)
            if t in builtins.SIGNATURES or t in EXPR_KEYWORDS:
                raise _err(d, f"{t} must be fully applied", "ArityError")
            if t in RESERVED:
                raise _err(d, f"unexpected {t!r}")
            if ":" not in t and self.module is None:
                raise _err(d, f"unbound name {t!r}", "UndefinedName")
            return ValRef(self.ref(d), d.span)
        if d.square:
            raise _err(d, "type arguments are only allowed after builtins and constructors")
        if not d.items:
            raise _err(d, "empty expression")
        head = _head(d)
        if head in EXPR_KEYWORDS:
            return getattr(self, "_form_" + {"@": "tyapp"}.get(head, head))(d, tvars, vars)
        if head in builtins.SIGNATURES:
            return self._builtin(d, tvars, vars)
        if len(d.items) < 2:
            raise _err(d, "application needs an argument", "ArityError")
        result = self.expr(d.items[0], tvars, vars)
        for a in d.items[1:]:
            result = App(result, self.expr(a, tvars, vars), d.span)
        return result

    def _expect(self, d: SList, n: int, shape: str) -> list:
        if len(d.items) != n:
            raise _err(d, f"expected {shape}", "ArityError")
        return d.items[1:]

    def _builtin(self, d: SList, tvars, vars) -> Expr:
        name = d.items[0].text
        targs, rest = self.type_args(d.items[1:], tvars)
        n_t, n_a = builtins.arity(name)
        if len(targs) != n_t or len(rest) != n_a:
            raise _err(d, f"{name} takes {n_t} type argument(s) and {n_a} argument(s)", "ArityError")
        return Builtin(name, targs, tuple(self.expr(a, tvars, vars) for a in rest), d.span)

    def _binding(self, b: Datum, tvars) -> tuple[str, Type]:
        if not (isinstance(b, SList) and not b.square and len(b.items) == 2):
            raise _err(b, "binder must be (name TYPE)")
        return _binder(b.items[0]), self.type(b.items[1], tvars)

    def _form_lam(self, d, tvars, vars):
        if len(d.items) < 3:
            raise _err(d, "expected (lam (x TYPE)... body)", "ArityError")
        binders = []
        for b in d.items[1:-1]:
            binders.append(self._binding(b, tvars))
        body = self.expr(d.items[-1], tvars, vars | {x for x, _ in binders})
        for x, t in reversed(binders):
            body = Lam(x, t, body, d.span)
        return body

    def _form_tlam(self, d, tvars, vars):
        if len(d.items) < 3:
            raise _err(d, "expected (tlam (a KIND)... body)", "ArityError")
        binders = []
        for b in d.items[1:-1]:
            if not (isinstance(b, SList) and not b.square and len(b.items) == 2):
                raise _err(b, "binder must be (a KIND)")
            binders.append((_binder(b.items[0], "type variable"), self.kind(b.items[1])))
        body = self.expr(d.items[-1], tvars | {a for a, _ in binders}, vars)
        for a, k in reversed(binders):
            body = TyLam(a, k, body, d.span)
        return body

    def _form_tyapp(self, d, tvars, vars):
        if len(d.items) < 3:
            raise _err(d, "expected (@ expr TYPE...)", "ArityError")
        result = self.expr(d.items[1], tvars, vars)
        for t in d.items[2:]:
            result = TyApp(result, self.type(t, tvars), d.span)
        return result

    def _form_record(self, d, tvars, vars):
        if len(d.items) < 2:
            raise _err(d, "expected (record REF [TYPES]? (field expr)...)", "ArityError")
        ref = self.ref(d.items[1], "record")
        targs, rest = self.type_args(d.items[2:], tvars)
        fields = []
        for f in rest:
            if not (isinstance(f, SList) and not f.square and len(f.items) == 2):
                raise _err(f, "record field must be (name expr)")
            fields.append((_symbol(f.items[0], "field name", VAR_RE), self.expr(f.items[1], tvars, vars)))
        return RecCon(ref, targs, tuple(fields), d.span)

    def _form_get(self, d, tvars, vars):
        ref, fld, arg = self._expect(d, 4, "(get REF field expr)")
        return RecProj(self.ref(ref, "record"), _symbol(fld, "field name", VAR_RE), self.expr(arg, tvars, vars), d.span)

    def _form_set(self, d, tvars, vars):
        ref, fld, rec, val = self._expect(d, 5, "(set REF field record value)")
        return RecUpd(
            self.ref(ref, "record"), _symbol(fld, "field name", VAR_RE),
            self.expr(rec, tvars, vars), self.expr(val, tvars, vars), d.span,
        )

    def _form_variant(self, d, tvars, vars):
        if len(d.items) < 2:
            raise _err(d, "expected (variant REF [TYPES]? Ctor expr)", "ArityError")
        ref = self.ref(d.items[1], "variant")
        targs, rest = self.type_args(d.items[2:], tvars)
        if len(rest) != 2:
            raise _err(d, "expected (variant REF [TYPES]? Ctor expr)", "ArityError")
        return VarCon(ref, targs, _symbol(rest[0], "constructor", DEF_RE), self.expr(rest[1], tvars, vars), d.span)

    def _pattern(self, p: Datum):
        if isinstance(p, Atom):
            match p.text if not p.is_string else None:
                case "_":
                    return PDefault(), set()
                case "unit":
                    return PUnit(), set()
                case "true":
                    return PBool(True), set()
                case "false":
                    return PBool(False), set()
                case "nil":
                    return PNil(), set()
        elif _head(p) == "cons" and len(p.items) == 3:
            h, t = _binder(p.items[1]), _binder(p.items[2])
            return PCons(h, t), {h, t}
        elif isinstance(p, SList) and not p.square and len(p.items) == 3:
            ref = self.ref(p.items[0], "variant")
            x = _binder(p.items[2])
            return PVariant(ref, _symbol(p.items[1], "constructor"), x), {x}
        raise _err(p, f"bad pattern {p!r}")

    def _form_case(self, d, tvars, vars):
        if len(d.items) < 3:
            raise _err(d, "expected (case expr (pattern body)...)", "ArityError")
        scrut = self.expr(d.items[1], tvars, vars)
        alts = []
        for a in d.items[2:]:
            if not (isinstance(a, SList) and not a.square and len(a.items) == 2):
                raise _err(a, "case alternative must be (pattern body)")
            pat, bound = self._pattern(a.items[0])
            alts.append(Alt(pat, self.expr(a.items[1], tvars, vars | bound)))
        return Case(scrut, tuple(alts), d.span)

    def _form_pure(self, d, tvars, vars):
        t, e = self._expect(d, 3, "(pure TYPE expr)")
        return UpdatePure(self.type(t, tvars), self.expr(e, tvars, vars), d.span)

    def _form_bind(self, d, tvars, vars):
        b, e1, e2 = self._expect(d, 4, "(bind (x TYPE) bound body)")
        x, t = self._binding(b, tvars)
        return UpdateBind(x, t, self.expr(e1, tvars, vars), self.expr(e2, tvars, vars | {x}), d.span)

    def _form_create(self, d, tvars, vars):
        ref, e = self._expect(d, 3, "(create TEMPLATE expr)")
        return UpdateCreate(self.ref(ref, "template"), self.expr(e, tvars, vars), d.span)

    def _form_fetch(self, d, tvars, vars):
        ref, e = self._expect(d, 3, "(fetch TEMPLATE cid)")
        return UpdateFetch(self.ref(ref, "template"), self.expr(e, tvars, vars), d.span)

    def _form_exercise(self, d, tvars, vars):
        ref, ch, cid, arg = self._expect(d, 5, "(exercise TEMPLATE Choice cid arg)")
        return UpdateExercise(
            self.ref(ref, "template"), _symbol(ch, "choice name"),
            self.expr(cid, tvars, vars), self.expr(arg, tvars, vars), d.span,
        )

    def _form_cid_leq(self, d, tvars, vars):
        t, a, b = self._expect(d, 4, "(cid_leq TYPE lhs rhs)")
        return CidLeq(self.type(t, tvars), self.expr(a, tvars, vars), self.expr(b, tvars, vars), d.span)

    def _form_list(self, d, tvars, vars):
        targs, rest = self.type_args(d.items[1:], tvars)
        if len(targs) != 1:
            raise _err(d, "expected (list [TYPE] expr...)", "ArityError")
        return list_expr(targs[0], [self.expr(e, tvars, vars) for e in rest])

    # definitions

    def clause(self, d: Datum, name: str) -> list | None:
        if _head(d) == name:
            return d.items[1:]
        return None

    def template(self, d: SList) -> TemplateDef:
        if len(d.items) < 3:
            raise _err(d, "expected (template NAME this CLAUSE...)", "ArityError")
        name = _symbol(d.items[1], "template name")
        this = _binder(d.items[2], "template parameter")
        vars = frozenset({this})
        ensure = signatories = observers = None
        choices = []
        for c in d.items[3:]:
            head = _head(c)
            if head in ("ensure", "signatories", "observers"):
                if len(c.items) != 2:
                    raise _err(c, f"expected ({head} expr)", "ArityError")
                value = self.expr(c.items[1], frozenset(), vars)
                if head == "ensure":
                    ensure = value
                elif head == "signatories":
                    signatories = value
                else:
                    observers = value
            elif head == "choice":
                choices.append(self.choice(c, this))
            else:
                raise _err(c, f"unexpected template clause {c!r}")
        if signatories is None:
            raise _err(d, f"template {name} has no signatories clause")
        names = [c.name for c in choices]
        if "Archive" in names:
            raise _err(d, f"template {name} must not define Archive; it is implicit", "DuplicateDefinition")
        if len(set(names)) != len(names):
            raise _err(d, f"duplicate choice name in template {name}", "DuplicateDefinition")
        return TemplateDef(
            name, this,
            ensure if ensure is not None else Lit(TRUE),
            signatories,
            observers if observers is not None else nil(PARTY_T),
            tuple(choices), d.span,
        )

    def choice(self, d: SList, this: str) -> ChoiceDef:
        items = d.items
        if len(items) not in (7, 8):
            raise _err(d, "expected (choice NAME consuming|nonconsuming (x TYPE) TYPE (controllers e) (observers e)? body)", "ArityError")
        name = _symbol(items[1], "choice name")
        if not _is_sym(items[2]) or items[2].text not in ("consuming", "nonconsuming"):
            raise _err(items[2], "expected consuming or nonconsuming")
        x, arg_t = self._binding(items[3], frozenset())
        if x == this:
            raise _err(items[3], "choice argument shadows the template parameter")
        result_t = self.type(items[4], frozenset())
        vars = frozenset({this, x})
        ctl = self.clause(items[5], "controllers")
        if ctl is None or len(ctl) != 1:
            raise _err(items[5], "expected (controllers expr)")
        controllers = self.expr(ctl[0], frozenset(), vars)
        observers = nil(PARTY_T)
        if len(items) == 8:
            obs = self.clause(items[6], "observers")
            if obs is None or len(obs) != 1:
                raise _err(items[6], "expected (observers expr)")
            observers = self.expr(obs[0], frozenset(), vars)
        body = self.expr(items[-1], frozenset(), vars)
        return ChoiceDef(
            name, items[2].text == "consuming", x, arg_t, result_t,
            controllers, observers, body, d.span,
        )

    def module_def(self, d: SList) -> Module:
        records, variants, values, templates = [], [], [], []
        for item in d.items[2:]:
            head = _head(item)
            if head == "record" or head == "variant":
                if len(item.items) < 2:
                    raise _err(item, f"expected ({head} NAME ...)", "ArityError")
                name = self.def_name(item.items[1])
                rest = item.items[2:]
                params: tuple = ()
                if rest and isinstance(rest[0], SList) and rest[0].square:
                    params = self.type_params(rest[0])
                    rest = rest[1:]
                tvars = frozenset(p for p, _ in params)
                members = []
                for m in rest:
                    if not (isinstance(m, SList) and not m.square and len(m.items) == 2):
                        raise _err(m, "expected (name TYPE)")
                    pat = VAR_RE if head == "record" else DEF_RE
                    members.append((_symbol(m.items[0], "member name", pat), self.type(m.items[1], tvars)))
                if len({n for n, _ in members}) != len(members):
                    raise _err(item, f"duplicate member in {name}", "DuplicateDefinition")
                if head == "record":
                    records.append(RecordDef(name, params, tuple(members), item.span))
                else:
                    variants.append(VariantDef(name, params, tuple(members), item.span))
            elif head == "value":
                if len(item.items) != 4:
                    raise _err(item, "expected (value NAME TYPE expr)", "ArityError")
                name = self.def_name(item.items[1])
                values.append(ValueDef(
                    name, self.type(item.items[2], frozenset()),
                    self.expr(item.items[3], frozenset(), frozenset()), item.span,
                ))
            elif head == "template":
                templates.append(self.template(item))
            else:
                raise _err(item, f"unexpected module item {item!r}")
        mod = Module(self.module, tuple(records), tuple(variants), tuple(values), tuple(templates), d.span)
        type_names = [r.name for r in records] + [v.name for v in variants]
        for names, what in ((type_names, "type"), ([v.name for v in values], "value"),
                            ([t.name for t in templates], "template")):
            dup = {n for n in names if names.count(n) > 1}
            if dup:
                raise _err(d, f"duplicate {what} definition {min(dup)!r}", "DuplicateDefinition")
        return mod.canonical()

    def def_name(self, d: Datum) -> str:
        name = _symbol(d, "definition name")
        if name in RESERVED:
            raise _err(d, f"reserved word {name!r} cannot name a definition")
        return name


def parse_package(text: str, filename: str = "<input>") -> Package:
    data = read(text, filename)
    if len(data) != 1 or _head(data[0]) != "package":
        where = data[0] if data else None
        span = where.span if where else Span(filename, 1, 1, 1, 1)
        raise ParseError("a package file holds exactly one (package NAME MODULE...) form", span)
    d = data[0]
    if len(d.items) < 2:
        raise _err(d, "expected (package NAME MODULE...)", "ArityError")
    pkg_name = _symbol(d.items[1], "package name", re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$"))
    modules = []
    for m in d.items[2:]:
        if _head(m) != "module" or len(m.items) < 2:
            raise _err(m, "expected (module NAME DEF...)")
        mod_name = _symbol(m.items[1], "module name")
        modules.append(_Parser(pkg_name, mod_name).module_def(m))
    names = [m.name for m in modules]
    if len(set(names)) != len(names):
        raise _err(d, "duplicate module name", "DuplicateDefinition")
    return Package(pkg_name, tuple(modules), d.span).canonical()


def parse_type(text: str, package: str | None = None, module: str | None = None) -> Type:
    (d,) = read(text)
    return _Parser(package, module).type(d, frozenset())


def parse_expr(text: str, package: str | None = None, module: str | None = None,
               vars: frozenset = frozenset()) -> Expr:
    (d,) = read(text)
    return _Parser(package, module).expr(d, frozenset(), vars)


def _actors(d: Datum) -> tuple[str, ...]:
    if not (isinstance(d, SList) and not d.square and d.items):
        raise _err(d, "expected non-empty party list (P ...)")
    return tuple(_party_name(p) for p in d.items)


def _command(p: _Parser, d: Datum, bound: frozenset) -> Command:
    head = _head(d)
    if head == "create":
        if len(d.items) != 3:
            raise _err(d, "expected (create TEMPLATE arg)", "ArityError")
        return CreateCommand(p.ref(d.items[1], "template"), p.expr(d.items[2], frozenset(), bound))
    if head == "exercise":
        if len(d.items) != 4:
            raise _err(d, "expected (exercise cid Choice arg)", "ArityError")
        return ExerciseCommand(
            p.expr(d.items[1], frozenset(), bound), _symbol(d.items[2], "choice name"),
            p.expr(d.items[3], frozenset(), bound),
        )
    raise _err(d, "expected (create ...) or (exercise ...) command")


def _cid_ref(d: Datum, bound: frozenset) -> str:
    if _is_sym(d) and (d.text == "_" or CID_RE.match(d.text)):
        return d.text
    if _is_sym(d) and d.text in bound:
        return d.text
    raise _err(d, f"undefined contract reference {d!r}", "UndefinedName")


def _sketch(p: _Parser, d: Datum, bound: frozenset) -> SketchNode:
    head = _head(d)
    if head in ("Create", "Fetch") and len(d.items) == 3:
        return SketchNode(head, _cid_ref(d.items[1], bound), p.ref(d.items[2], "template"))
    if head == "Exercise" and len(d.items) >= 4:
        children = tuple(_sketch(p, c, bound) for c in d.items[4:])
        return SketchNode(head, _cid_ref(d.items[1], bound), p.ref(d.items[2], "template"),
                          _symbol(d.items[3], "choice name"), children)
    raise _err(d, f"bad tree sketch {d!r}")


def parse_scenario(text: str, filename: str = "<input>") -> Scenario:
    """Parse a scenario script.

    Steps::

        (submit (P...) COMMAND NAME?)
        (submit-must-fail (P...) COMMAND ErrorClass)
        (assert-active NAME TEMPLATE)
        (assert-archived NAME)
        (project P SKETCH...)

    ``COMMAND`` is ``(create TEMPLATE arg)`` or ``(exercise cid Choice arg)``.
    Names bound by earlier submits are variables in later expressions.
    """
    p = _Parser(None, None)
    bound: frozenset = frozenset()
    steps: list[Step] = []
    for d in read(text, filename):
        head = _head(d)
        if head == "submit":
            if len(d.items) not in (3, 4):
                raise _err(d, "expected (submit (P...) COMMAND NAME?)", "ArityError")
            cmd = _command(p, d.items[2], bound)
            name = None
            if len(d.items) == 4:
                name = _binder(d.items[3], "bind name")
                if name in bound:
                    raise _err(d.items[3], f"duplicate bind {name!r}", "DuplicateBind")
            steps.append(Submit(_actors(d.items[1]), cmd, name, d.span))
            if name:
                bound = bound | {name}
        elif head == "submit-must-fail":
            if len(d.items) != 4:
                raise _err(d, "expected (submit-must-fail (P...) COMMAND ErrorClass)", "ArityError")
            steps.append(SubmitMustFail(
                _actors(d.items[1]), _command(p, d.items[2], bound),
                _symbol(d.items[3], "error class"), d.span,
            ))
        elif head == "assert-active":
            if len(d.items) != 3:
                raise _err(d, "expected (assert-active NAME TEMPLATE)", "ArityError")
            steps.append(AssertActive(_cid_ref(d.items[1], bound), p.ref(d.items[2], "template"), d.span))
        elif head == "assert-archived":
            if len(d.items) != 2:
                raise _err(d, "expected (assert-archived NAME)", "ArityError")
            steps.append(AssertArchived(_cid_ref(d.items[1], bound), d.span))
        elif head == "project":
            if len(d.items) < 2:
                raise _err(d, "expected (project P SKETCH...)", "ArityError")
            steps.append(Project(
                _party_name(d.items[1]), tuple(_sketch(p, s, bound) for s in d.items[2:]), d.span,
            ))
        else:
            raise _err(d, f"unknown scenario step {d!r}")
    return Scenario(tuple(steps))


# --- pretty printing ---------------------------------------------------------

WIDTH = 88


@dataclass
class _Group:
    items: list
    square: bool = False


def _flat(doc) -> str:
    if isinstance(doc, str):
        return doc
    o, c = ("[", "]") if doc.square else ("(", ")")
    return o + " ".join(_flat(i) for i in doc.items) + c


def _layout(doc, indent: int, out: list[str]) -> None:
    flat = _flat(doc)
    if isinstance(doc, str) or indent + len(flat) <= WIDTH:
        out.append(flat)
        return
    o, c = ("[", "]") if doc.square else ("(", ")")
    lead = []
    rest = list(doc.items)
    while rest and isinstance(rest[0], str):
        lead.append(rest.pop(0))
    if not lead and rest:
        lead.append(_flat(rest.pop(0)))
    out.append(o + " ".join(lead))
    pad = " " * (indent + 2)
    for item in rest:
        out.append("\n" + pad)
        _layout(item, indent + 2, out)
    out.append(c)


class _Printer:
    def __init__(self, package: str | None):
        self.package = package

    def ref(self, q: QualifiedName) -> str:
        if q.package is None or q.package == self.package:
            return f"{q.module}:{q.name}"
        return str(q)

    def kind(self, k: Kind):
        if isinstance(k, Star):
            return "*"
        parts = []
        while isinstance(k, KArrow):
            parts.append(self.kind(k.param))
            k = k.result
        return _Group(["->", *parts, self.kind(k)])

    def type(self, t: Type):
        match t:
            case TVar(name):
                return name
            case Prim(name):
                return name
            case FunArrow():
                return "->"
            case Named(ref):
                return self.ref(ref)
            case Forall():
                binders = []
                while isinstance(t, Forall):
                    binders.append(_Group([t.var, self.kind(t.kind)]))
                    t = t.body
                return _Group(["forall", *binders, self.type(t)])
        head, args = unapply(t)
        if isinstance(head, FunArrow) and len(args) == 2:
            parts = [self.type(args[0])]
            rest = args[1]
            while True:
                h2, a2 = unapply(rest)
                if isinstance(h2, FunArrow) and len(a2) == 2:
                    parts.append(self.type(a2[0]))
                    rest = a2[1]
                else:
                    break
            return _Group(["->", *parts, self.type(rest)])
        if isinstance(head, FunArrow) and len(args) == 1:
            return _Group(["->", self.type(args[0])])
        if isinstance(head, FunArrow):
            return _Group([_Group(["->", self.type(args[0]), self.type(args[1])]), *map(self.type, args[2:])])
        return _Group([self.type(head), *map(self.type, args)])

    def targs(self, ts) -> list:
        return [_Group([self.type(t) for t in ts], square=True)] if ts else []

    def literal(self, v) -> str:
        match v:
            case UnitV():
                return "unit"
            case BoolV(b):
                return "true" if b else "false"
            case Int64V(n):
                return str(n)
            case DecimalV(d):
                return str(d)
            case TextV(s):
                return quote_string(s)
            case PartyV(name):
                return "'" + name
            case DateV(d):
                return d.isoformat()
            case TimestampV(ts):
                return format_timestamp(ts)
        raise TypeError(f"not a literal: {v!r}")

    def pattern(self, p):
        match p:
            case PDefault():
                return "_"
            case PUnit():
                return "unit"
            case PBool(b):
                return "true" if b else "false"
            case PNil():
                return "nil"
            case PCons(h, t):
                return _Group(["cons", h, t])
            case PVariant(ref, variant, binder):
                return _Group([self.ref(ref), variant, binder])
        raise TypeError(p)

    def _list_items(self, e: Builtin):
        t = e.type_args[0]
        items = []
        while isinstance(e, Builtin) and e.name == "CONS" and e.type_args == (t,):
            items.append(e.args[0])
            e = e.args[1]
        if isinstance(e, Builtin) and e.name == "NIL" and e.type_args == (t,):
            return items
        return None

    def expr(self, e: Expr):
        match e:
            case Var(name):
                return name
            case Lit(v):
                return self.literal(v)
            case ValRef(ref):
                return self.ref(ref)
            case Lam():
                binders = []
                while isinstance(e, Lam):
                    binders.append(_Group([e.var, self.type(e.annot)]))
                    e = e.body
                return _Group(["lam", *binders, self.expr(e)])
            case TyLam():
                binders = []
                while isinstance(e, TyLam):
                    binders.append(_Group([e.var, self.kind(e.kind)]))
                    e = e.body
                return _Group(["tlam", *binders, self.expr(e)])
            case App():
                args = []
                while isinstance(e, App):
                    args.append(e.arg)
                    e = e.fun
                return _Group([self.expr(e), *(self.expr(a) for a in reversed(args))])
            case TyApp():
                targs = []
                while isinstance(e, TyApp):
                    targs.append(e.arg)
                    e = e.fun
                return _Group(["@", self.expr(e), *(self.type(t) for t in reversed(targs))])
            case Builtin(name, targs, args):
                if name == "CONS":
                    items = self._list_items(e)
                    if items is not None:
                        return _Group(["list", *self.targs(targs), *(self.expr(i) for i in items)])
                return _Group([name, *self.targs(targs), *(self.expr(a) for a in args)])
            case RecCon(ref, targs, fields):
                return _Group(["record", self.ref(ref), *self.targs(targs),
                               *(_Group([f, self.expr(v)]) for f, v in fields)])
            case RecProj(ref, fld, arg):
                return _Group(["get", self.ref(ref), fld, self.expr(arg)])
            case RecUpd(ref, fld, rec, val):
                return _Group(["set", self.ref(ref), fld, self.expr(rec), self.expr(val)])
            case VarCon(ref, targs, variant, arg):
                return _Group(["variant", self.ref(ref), *self.targs(targs), variant, self.expr(arg)])
            case Case(scrut, alts):
                return _Group(["case", self.expr(scrut),
                               *(_Group([self.pattern(a.pattern), self.expr(a.body)]) for a in alts)])
            case UpdatePure(t, x):
                return _Group(["pure", self.type(t), self.expr(x)])
            case UpdateBind(x, t, bound, body):
                return _Group(["bind", _Group([x, self.type(t)]), self.expr(bound), self.expr(body)])
            case UpdateCreate(ref, arg):
                return _Group(["create", self.ref(ref), self.expr(arg)])
            case UpdateFetch(ref, cid):
                return _Group(["fetch", self.ref(ref), self.expr(cid)])
            case UpdateExercise(ref, ch, cid, arg):
                return _Group(["exercise", self.ref(ref), ch, self.expr(cid), self.expr(arg)])
            case CidLeq(t, a, b):
                return _Group(["cid_leq", self.type(t), self.expr(a), self.expr(b)])
        raise TypeError(f"not an expression: {e!r}")

    def params(self, params) -> list:
        if not params:
            return []
        return [_Group([_Group([a, self.kind(k)]) for a, k in params], square=True)]

    def choice(self, c: ChoiceDef):
        return _Group([
            "choice", c.name, "consuming" if c.consuming else "nonconsuming",
            _Group([c.arg_var, self.type(c.arg_type)]), self.type(c.result_type),
            _Group(["controllers", self.expr(c.controllers)]),
            _Group(["observers", self.expr(c.observers)]),
            self.expr(c.body),
        ])

    def module(self, m: Module):
        items: list = ["module", m.name]
        for r in m.records:
            items.append(_Group(["record", r.name, *self.params(r.params),
                                 *(_Group([f, self.type(t)]) for f, t in r.fields)]))
        for v in m.variants:
            items.append(_Group(["variant", v.name, *self.params(v.params),
                                 *(_Group([c, self.type(t)]) for c, t in v.constructors)]))
        for v in m.values:
            items.append(_Group(["value", v.name, self.type(v.type), self.expr(v.body)]))
        for t in m.templates:
            items.append(_Group([
                "template", t.name, t.param,
                _Group(["ensure", self.expr(t.ensure)]),
                _Group(["signatories", self.expr(t.signatories)]),
                _Group(["observers", self.expr(t.observers)]),
                *(self.choice(c) for c in t.choices),
            ]))
        return _Group(items)


def _render(doc) -> str:
    out: list[str] = []
    _layout(doc, 0, out)
    return "".join(out)


def pretty_package(pkg: Package) -> str:
    """Canonical text: sorted definitions, fixed layout, trailing newline."""
    pkg = pkg.canonical()
    p = _Printer(pkg.name)
    return _render(_Group(["package", pkg.name, *(p.module(m) for m in pkg.modules)])) + "\n"


def pretty_type(t: Type, package: str | None = None) -> str:
    return _flat(_Printer(package).type(t))


def pretty_expr(e: Expr, package: str | None = None) -> str:
    return _render(_Printer(package).expr(e))


def pretty_kind(k: Kind) -> str:
    return _flat(_Printer(None).kind(k))
