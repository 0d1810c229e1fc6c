"""Kinding, typing, serializability, and template/package well-formedness."""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field

from . import builtins
from .ast import (
    BOOL_T,
    PARTY_T,
    PRIM_KINDS,
    STAR,
    UNIT_T,
    App,
    Builtin,
    Case,
    CidLeq,
    Expr,
    Forall,
    FunArrow,
    KArrow,
    Kind,
    Lam,
    Lit,
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
    Var,
    VarCon,
    VariantDef,
    alpha_equal,
    apply_type,
    as_fun,
    contract_id_of,
    free_type_vars,
    is_empty_list_literal,
    kind_arrows,
    list_of,
    substitute_type,
    substitute_types,
    unapply,
    update_of,
)
from .errors import LfTypeError
from .packages import World, iter_refs, load_order
from .values import (
    BoolV,
    DateV,
    DecimalV,
    Int64V,
    PartyV,
    TextV,
    TimestampV,
    UnitV,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

_LIT_TYPES = {
    UnitV: "Unit", BoolV: "Bool", Int64V: "Int64", DecimalV: "Decimal", TextV: "Text",
    DateV: "Date", TimestampV: "Timestamp", PartyV: "Party",
}


@dataclass(frozen=True)
class Context:
    world: World
    kinds: dict[str, Kind] = field(default_factory=dict)
    types: dict[str, Type] = field(default_factory=dict)

    def with_var(self, name: str, t: Type) -> Context:
        return Context(self.world, self.kinds, {**self.types, name: t})

    def with_tvar(self, name: str, k: Kind) -> Context:
        return Context(self.world, {**self.kinds, name: k}, self.types)


def _fail(cls: str, msg: str, node=None) -> LfTypeError:
    return LfTypeError(msg, getattr(node, "span", None), cls)


def _show(t: Type) -> str:
    from .parser import pretty_type

    return pretty_type(t)


# --- kinds -------------------------------------------------------------------


def kind_of(ctx: Context, t: Type) -> Kind:
    match t:
        case TVar(name):
            if name not in ctx.kinds:
                raise _fail("UnboundVar", f"unbound type variable {name}", t)
            return ctx.kinds[name]
        case FunArrow():
            return KArrow(STAR, KArrow(STAR, STAR))
        case Prim(name):
            return PRIM_KINDS[name]
        case Named(ref):
            d = ctx.world.type_def(ref)
            if d is None:
                raise _fail("UnknownRef", f"unknown type {ref}", t)
            return d.kind()
        case Forall(var, k, body):
            _expect_star(ctx.with_tvar(var, k), body)
            return STAR
        case TApp(f, a):
            fk = kind_of(ctx, f)
            if not isinstance(fk, KArrow):
                raise _fail("KindMismatch", f"type {_show(f)} of kind {fk} cannot be applied", t)
            ak = kind_of(ctx, a)
            if ak != fk.param:
                raise _fail("KindMismatch", f"expected kind {fk.param}, got {ak} for {_show(a)}", t)
            return fk.result
    raise TypeError(f"not a type: {t!r}")


def _expect_star(ctx: Context, t: Type) -> None:
    k = kind_of(ctx, t)
    if k != STAR:
        raise _fail("KindMismatch", f"type {_show(t)} has kind {k}, expected *", t)


# --- types -------------------------------------------------------------------


def _expect_type(expected: Type, actual: Type, node, what: str = "expression") -> None:
    if not alpha_equal(expected, actual):
        raise _fail("TypeMismatch", f"{what} has type {_show(actual)}, expected {_show(expected)}", node)


def _instantiate(ctx: Context, d: RecordDef | VariantDef, type_args, node) -> dict[str, Type]:
    if len(type_args) != len(d.params):
        raise _fail("NotSaturated", f"{d.name} takes {len(d.params)} type argument(s), got {len(type_args)}", node)
    for (p, k), t in zip(d.params, type_args):
        tk = kind_of(ctx, t)
        if tk != k:
            raise _fail("KindMismatch", f"type argument {p} of {d.name} needs kind {k}, got {tk}", node)
    return {p: t for (p, _), t in zip(d.params, type_args)}


def _named_args(ctx: Context, t: Type, ref: QualifiedName, node) -> list[Type]:
    head, args = unapply(t)
    if not (isinstance(head, Named) and head.ref == ref):
        raise _fail("TypeMismatch", f"expected a value of type {ref}, got {_show(t)}", node)
    return args


def _record(ctx: Context, ref: QualifiedName, node) -> RecordDef:
    d = ctx.world.record(ref)
    if d is None:
        raise _fail("UnknownRef", f"unknown record {ref}", node)
    return d


def _variant(ctx: Context, ref: QualifiedName, node) -> VariantDef:
    d = ctx.world.variant(ref)
    if d is None:
        raise _fail("UnknownRef", f"unknown variant {ref}", node)
    return d


def _template(ctx: Context, ref: QualifiedName, node) -> TemplateDef:
    t = ctx.world.template(ref)
    if t is None:
        raise _fail("UnknownRef", f"unknown template {ref}", node)
    return t


def _field_type(d: RecordDef, name: str, node) -> Type:
    for f, t in d.fields:
        if f == name:
            return t
    raise _fail("TypeMismatch", f"record {d.name} has no field {name}", node)


def _fresh_tvar(base: str, avoid) -> str:
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def type_of(ctx: Context, e: Expr) -> Type:
    match e:
        case Var(name):
            if name not in ctx.types:
                raise _fail("UnboundVar", f"unbound variable {name}", e)
            return ctx.types[name]
        case Lit(v):
            return Prim(_LIT_TYPES[type(v)])
        case ValRef(ref):
            d = ctx.world.value(ref)
            if d is None:
                raise _fail("UnknownRef", f"unknown value {ref}", e)
            return d.type
        case Lam(var, annot, body):
            _expect_star(ctx, annot)
            return TApp(TApp(FunArrow(), annot), type_of(ctx.with_var(var, annot), body))
        case App(f, a):
            ft = type_of(ctx, f)
            parts = as_fun(ft)
            if parts is None:
                raise _fail("TypeMismatch", f"applying a non-function of type {_show(ft)}", e)
            _expect_type(parts[0], type_of(ctx, a), e, "argument")
            return parts[1]
        case TyLam(var, k, body):
            if var not in ctx.kinds:
                return Forall(var, k, type_of(ctx.with_tvar(var, k), body))
            # shadowing: rename the outer variable in the context, then undo
            outer = _fresh_tvar(var, set(ctx.kinds) | set().union(*map(free_type_vars, ctx.types.values())))
            kinds = {(outer if n == var else n): kk for n, kk in ctx.kinds.items()}
            kinds[var] = k
            types = {n: substitute_type(t, var, TVar(outer)) for n, t in ctx.types.items()}
            inner = type_of(Context(ctx.world, kinds, types), body)
            return substitute_type(Forall(var, k, inner), outer, TVar(var))
        case TyApp(f, arg):
            ft = type_of(ctx, f)
            if not isinstance(ft, Forall):
                raise _fail("TypeMismatch", f"type application to a non-polymorphic {_show(ft)}", e)
            ak = kind_of(ctx, arg)
            if ak != ft.kind:
                raise _fail("KindMismatch", f"type argument needs kind {ft.kind}, got {ak}", e)
            return substitute_type(ft.body, ft.var, arg)
        case Builtin(name, targs, args):
            sig = builtins.SIGNATURES[name]
            if len(targs) != len(sig.type_params) or len(args) != len(sig.arg_types):
                raise _fail("NotSaturated", f"{name} is not fully applied", e)
            for t in targs:
                _expect_star(ctx, t)
            mapping = {p: t for (p, _), t in zip(sig.type_params, targs)}
            for i, (a, want) in enumerate(zip(args, sig.arg_types)):
                _expect_type(substitute_types(want, mapping), type_of(ctx, a), a, f"argument {i + 1} of {name}")
            return substitute_types(sig.result, mapping)
        case RecCon(ref, targs, fields):
            d = _record(ctx, ref, e)
            mapping = _instantiate(ctx, d, targs, e)
            if [f for f, _ in fields] != [f for f, _ in d.fields]:
                want = " ".join(f for f, _ in d.fields)
                raise _fail("NotSaturated", f"record {d.name} needs exactly the fields ({want}) in order", e)
            for (f, fe), (_, ft) in zip(fields, d.fields):
                _expect_type(substitute_types(ft, mapping), type_of(ctx, fe), fe, f"field {f}")
            return apply_type(Named(ref), targs)
        case RecProj(ref, fld, arg):
            d = _record(ctx, ref, e)
            args = _named_args(ctx, type_of(ctx, arg), ref, e)
            return substitute_types(_field_type(d, fld, e), dict(zip((p for p, _ in d.params), args)))
        case RecUpd(ref, fld, rec, val):
            d = _record(ctx, ref, e)
            rt = type_of(ctx, rec)
            args = _named_args(ctx, rt, ref, e)
            ft = substitute_types(_field_type(d, fld, e), dict(zip((p for p, _ in d.params), args)))
            _expect_type(ft, type_of(ctx, val), val, f"field {fld}")
            return rt
        case VarCon(ref, targs, ctor, arg):
            d = _variant(ctx, ref, e)
            mapping = _instantiate(ctx, d, targs, e)
            for c, ct in d.constructors:
                if c == ctor:
                    _expect_type(substitute_types(ct, mapping), type_of(ctx, arg), arg, f"argument of {ctor}")
                    return apply_type(Named(ref), targs)
            raise _fail("TypeMismatch", f"variant {d.name} has no constructor {ctor}", e)
        case Case(scrut, alts):
            return _case(ctx, e, type_of(ctx, scrut), alts)
        case UpdatePure(t, x):
            _expect_star(ctx, t)
            _expect_type(t, type_of(ctx, x), x)
            return update_of(t)
        case UpdateBind(var, t, bound, body):
            _expect_star(ctx, t)
            _expect_type(update_of(t), type_of(ctx, bound), bound, "bound update")
            bt = type_of(ctx.with_var(var, t), body)
            if not (isinstance(bt, TApp) and bt.fun == Prim("Update")):
                raise _fail("TypeMismatch", f"bind body has type {_show(bt)}, expected an Update", body)
            return bt
        case UpdateCreate(ref, arg):
            _template(ctx, ref, e)
            _expect_type(Named(ref), type_of(ctx, arg), arg, "contract argument")
            return update_of(contract_id_of(Named(ref)))
        case UpdateFetch(ref, cid):
            _template(ctx, ref, e)
            _expect_type(contract_id_of(Named(ref)), type_of(ctx, cid), cid, "contract id")
            return update_of(Named(ref))
        case UpdateExercise(ref, ch, cid, arg):
            t = _template(ctx, ref, e)
            c = t.choice(ch)
            if c is None:
                raise _fail("UnknownRef", f"template {ref} has no choice {ch}", e)
            _expect_type(contract_id_of(Named(ref)), type_of(ctx, cid), cid, "contract id")
            _expect_type(c.arg_type, type_of(ctx, arg), arg, f"argument of choice {ch}")
            return update_of(c.result_type)
        case CidLeq(t, a, b):
            _expect_star(ctx, t)
            _expect_type(contract_id_of(t), type_of(ctx, a), a)
            _expect_type(contract_id_of(t), type_of(ctx, b), b)
            return BOOL_T
    raise TypeError(f"not an expression: {e!r}")


def _case(ctx: Context, node: Case, st: Type, alts) -> Type:
    result: Type | None = None
    for alt in alts:
        inner = ctx
        pat = alt.pattern
        match pat:
            case PDefault():
                pass
            case PUnit():
                _expect_type(UNIT_T, st, node, "scrutinee")
            case PBool():
                _expect_type(BOOL_T, st, node, "scrutinee")
            case PNil() | PCons():
                head, args = unapply(st)
                if head != Prim("List") or len(args) != 1:
                    raise _fail("TypeMismatch", f"list pattern on scrutinee of type {_show(st)}", node)
                if isinstance(pat, PCons):
                    inner = ctx.with_var(pat.head, args[0]).with_var(pat.tail, st)
            case PVariant(ref, ctor, binder):
                d = _variant(ctx, ref, node)
                args = _named_args(ctx, st, ref, node)
                ct = next((t for c, t in d.constructors if c == ctor), None)
                if ct is None:
                    raise _fail("TypeMismatch", f"variant {d.name} has no constructor {ctor}", node)
                inner = ctx.with_var(binder, substitute_types(ct, dict(zip((p for p, _ in d.params), args))))
        bt = type_of(inner, alt.body)
        if result is None:
            result = bt
        else:
            _expect_type(result, bt, alt.body, "case alternative")
    assert result is not None
    return result


# --- serializability -----------------------------------------------------------


def is_serializable(ctx: Context, t: Type) -> bool:
    """First-order, ground data: no arrows, foralls, updates, or free variables.

    A named type is serializable when its arguments are and its definition is,
    where the definition's own parameters count as serializable placeholders.
    Recursive definitions are assumed serializable while being checked.
    """
    return _ser(ctx.world, t, frozenset(), set())


def _ser(world: World, t: Type, params: frozenset, visiting: set) -> bool:
    head, args = unapply(t)
    match head:
        case TVar(name):
            return name in params and not args
        case Prim(name):
            if name in ("List", "ContractId"):
                return len(args) == 1 and _ser(world, args[0], params, visiting)
            return name not in ("Update",) and PRIM_KINDS[name] == STAR and not args
        case Named(ref):
            d = world.type_def(ref)
            if d is None or len(args) != len(d.params):
                return False
            if any(k != STAR for _, k in d.params):
                return False
            return all(_ser(world, a, params, visiting) for a in args) and _def_ser(world, d, ref, visiting)
    return False


def _def_ser(world: World, d, ref: QualifiedName, visiting: set) -> bool:
    if ref in visiting:
        return True
    visiting.add(ref)
    members = d.fields if isinstance(d, RecordDef) else d.constructors
    ps = frozenset(p for p, _ in d.params)
    ok = all(_ser(world, mt, ps, visiting) for _, mt in members)
    visiting.discard(ref)
    return ok


# --- definitions -----------------------------------------------------------------


def _in(where: str, err: LfTypeError, span=None) -> LfTypeError:
    err.message = f"{where}: {err.message}"
    err.args = (err.message,)
    if err.span is None:
        err.span = span
    return err


def _expect_expr(ctx: Context, e: Expr, t: Type, what: str) -> None:
    _expect_type(t, type_of(ctx, e), e, what)


def check_template(ctx: Context, pkg: str, module: str, t: TemplateDef) -> None:
    ref = QualifiedName(pkg, module, t.name)
    rec = ctx.world.record(ref)
    where = f"template {t.name}"
    if rec is None:
        raise _fail("BadTemplate", f"{where}: no record {t.name} defines the contract argument", t)
    if rec.params:
        raise _fail("BadTemplate", f"{where}: the contract argument record must not take type parameters", t)
    ct = Named(ref)
    try:
        if not is_serializable(ctx, ct):
            raise _fail("NotSerializable", f"contract argument type {t.name} is not serializable", rec)
        tctx = ctx.with_var(t.param, ct)
        _expect_expr(tctx, t.ensure, BOOL_T, "ensure clause")
        _expect_expr(tctx, t.signatories, list_of(PARTY_T), "signatories")
        _expect_expr(tctx, t.observers, list_of(PARTY_T), "observers")
        if is_empty_list_literal(t.signatories):
            raise _fail("NonEmptySignatoryUnprovable", "signatories are the empty list", t.signatories)
    except LfTypeError as err:
        raise _in(where, err, t.span) from None
    for c in t.all_choices():
        cwhere = f"{where}, choice {c.name}"
        try:
            for what, ty in (("argument", c.arg_type), ("result", c.result_type)):
                _expect_star(ctx, ty)
                if not is_serializable(ctx, ty):
                    raise _fail("NotSerializable", f"{what} type {_show(ty)} is not serializable", c)
            cctx = tctx.with_var(c.arg_var, c.arg_type)
            _expect_expr(cctx, c.controllers, list_of(PARTY_T), "controllers")
            _expect_expr(cctx, c.observers, list_of(PARTY_T), "choice observers")
            _expect_expr(cctx, c.body, update_of(c.result_type), "choice body")
        except LfTypeError as err:
            raise _in(cwhere, err, c.span or t.span) from None


def check_package(world: World, pkg: Package) -> World:
    """Typecheck ``pkg`` against the already loaded ``world``; returns the extended world."""
    for r in iter_refs(pkg.modules):
        if r.package != pkg.name and r.package not in world.packages:
            raise LfTypeError(f"reference to {r} from a package that is not loaded", pkg.span, "UnknownRef")
    full = world.extended(pkg)
    ctx = Context(full)
    for m in pkg.modules:
        for d in (*m.records, *m.variants):
            dctx = ctx
            for p, k in d.params:
                dctx = dctx.with_tvar(p, k)
            members = d.fields if isinstance(d, RecordDef) else d.constructors
            try:
                for _, mt in members:
                    _expect_star(dctx, mt)
            except LfTypeError as err:
                raise _in(f"type {d.name}", err, d.span) from None
        for v in m.values:
            try:
                _expect_star(ctx, v.type)
                _expect_expr(ctx, v.body, v.type, "value body")
            except LfTypeError as err:
                raise _in(f"value {v.name}", err, v.span) from None
        for t in m.templates:
            check_template(ctx, pkg.name, m.name, t)
    return full


def check_packages(pkgs: list[Package], world: World | None = None) -> World:
    """Load and check packages in dependency order."""
    world = world or World()
    for p in load_order(pkgs):
        world = check_package(world, p)
    return world


__all__ = [
    "Context",
    "check_package",
    "check_packages",
    "check_template",
    "is_serializable",
    "kind_arrows",
    "kind_of",
    "type_of",
]
