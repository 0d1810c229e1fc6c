"""Hypothesis strategies shared by the property suites."""

from __future__ import annotations

import datetime as dt
import string

from hypothesis import strategies as st

from lfcore.ast import (
    PARTY_T,
    STAR,
    Alt,
    App,
    Builtin,
    Case,
    ChoiceDef,
    CidLeq,
    Forall,
    KArrow,
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
    TApp,
    TemplateDef,
    TVar,
    TyApp,
    TyLam,
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
    fn,
    nil,
)
from lfcore.numeric import INT64_MAX, INT64_MIN, MAX_SCALED, Numeric
from lfcore.transaction import CreateA, ExerciseA, FetchA
from lfcore.values import (
    UNIT,
    BoolV,
    ContractIdV,
    DateV,
    DecimalV,
    Int64V,
    PartyV,
    TextV,
    TimestampV,
)

PARTIES = ("A", "B", "C", "D", "E")
PKG = "Gen"
MODULES = ("Alpha", "Beta.Gamma")
VAR_NAMES = ("x", "y", "z", "acc", "n_1", "Item")
TVAR_NAMES = ("a", "b", "c")


# --- literals and types ------------------------------------------------------

party_names = st.sampled_from(PARTIES + ("Bank", "alice.1", "Big-Corp", "x:y"))

literals = st.one_of(
    st.just(UNIT),
    st.booleans().map(BoolV),
    st.integers(INT64_MIN, INT64_MAX).map(Int64V),
    st.integers(-MAX_SCALED, MAX_SCALED).map(lambda n: DecimalV(Numeric(n))),
    st.text(st.characters(codec="utf-8", exclude_categories=("Cs",)), max_size=12).map(TextV),
    st.dates(dt.date(1, 1, 1), dt.date(9999, 12, 31)).map(DateV),
    st.datetimes(dt.datetime(1, 1, 1), dt.datetime(9999, 12, 31)).map(TimestampV),
    party_names.map(PartyV),
)


def refs(kind: str):
    prefix = {"type": "T", "value": "v", "template": "T"}[kind]
    return st.builds(
        QualifiedName,
        st.sampled_from((PKG, "Dep")),
        st.sampled_from(MODULES),
        st.sampled_from([f"{prefix}{i}" for i in range(3)]),
    )


kinds = st.recursive(st.just(STAR), lambda k: st.builds(KArrow, k, k), max_leaves=3)

_PRIMS = ("Unit", "Bool", "Int64", "Decimal", "Text", "Date", "Timestamp", "Party")


@st.composite
def types(draw, tvars: frozenset = frozenset(), depth: int = 3):
    leaves = [st.sampled_from(_PRIMS).map(Prim), refs("type").map(Named)]
    if tvars:
        leaves.append(st.sampled_from(sorted(tvars)).map(TVar))
    if depth <= 0:
        return draw(st.one_of(leaves))
    sub = types(tvars, depth - 1)
    choice = draw(st.integers(0, 5))
    if choice == 0:
        return draw(st.one_of(leaves))
    if choice == 1:
        return fn(draw(sub), draw(sub))
    if choice == 2:
        head = draw(st.sampled_from([Prim("List"), Prim("ContractId"), Prim("Update")]))
        return TApp(head, draw(sub))
    if choice == 3:
        return TApp(Named(draw(refs("type"))), draw(sub))
    if choice == 4:
        v = draw(st.sampled_from(TVAR_NAMES))
        return Forall(v, draw(kinds), draw(types(tvars | {v}, depth - 1)))
    return TApp(TVar(draw(st.sampled_from(sorted(tvars)))), draw(sub)) if tvars else draw(sub)


# --- expressions -------------------------------------------------------------

_BUILTINS = [("ADD_INT64", 0, 2), ("EQUAL", 1, 2), ("NIL", 1, 0), ("CONS", 1, 2), ("ERROR", 1, 1),
             ("APPEND_TEXT", 0, 2), ("FOLDL", 2, 3), ("NOT", 0, 1)]


@st.composite
def exprs(draw, vars: frozenset = frozenset(), tvars: frozenset = frozenset(), depth: int = 3):
    leaf = [literals.map(Lit), refs("value").map(ValRef)]
    if vars:
        leaf.append(st.sampled_from(sorted(vars)).map(Var))
    if depth <= 0:
        return draw(st.one_of(leaf))
    ty = types(tvars, 1)
    sub = exprs(vars, tvars, depth - 1)
    binder = st.sampled_from(VAR_NAMES)
    form = draw(st.integers(0, 17))
    match form:
        case 0:
            return draw(st.one_of(leaf))
        case 1:
            x = draw(binder)
            return Lam(x, draw(ty), draw(exprs(vars | {x}, tvars, depth - 1)))
        case 2:
            return App(draw(sub), draw(sub))
        case 3:
            a = draw(st.sampled_from(TVAR_NAMES))
            return TyLam(a, draw(kinds), draw(exprs(vars, tvars | {a}, depth - 1)))
        case 4:
            return TyApp(draw(sub), draw(ty))
        case 5:
            name, nt, na = draw(st.sampled_from(_BUILTINS))
            return Builtin(name, tuple(draw(ty) for _ in range(nt)), tuple(draw(sub) for _ in range(na)))
        case 6:
            n = draw(st.integers(0, 3))
            names = draw(st.lists(st.sampled_from(("f", "g", "amount", "h_2")), min_size=n, max_size=n, unique=True))
            return RecCon(draw(refs("type")), tuple(draw(ty) for _ in range(draw(st.integers(0, 2)))),
                          tuple((f, draw(sub)) for f in names))
        case 7:
            return RecProj(draw(refs("type")), draw(st.sampled_from(("f", "g"))), draw(sub))
        case 8:
            return RecUpd(draw(refs("type")), "f", draw(sub), draw(sub))
        case 9:
            return VarCon(draw(refs("type")), tuple(draw(ty) for _ in range(draw(st.integers(0, 2)))),
                          draw(st.sampled_from(("Left", "Right", "Node.Leaf"))), draw(sub))
        case 10:
            alts = []
            for _ in range(draw(st.integers(1, 3))):
                kind = draw(st.integers(0, 5))
                if kind == 4:
                    h, t = draw(st.lists(binder, min_size=2, max_size=2, unique=True))
                    pat, bound = PCons(h, t), {h, t}
                elif kind == 5:
                    x = draw(binder)
                    pat, bound = PVariant(draw(refs("type")), draw(st.sampled_from(("Left", "Right"))), x), {x}
                else:
                    pat, bound = [PDefault(), PUnit(), PNil(), PBool(draw(st.booleans()))][kind], set()
                alts.append(Alt(pat, draw(exprs(vars | bound, tvars, depth - 1))))
            return Case(draw(sub), tuple(alts))
        case 11:
            return UpdatePure(draw(ty), draw(sub))
        case 12:
            x = draw(binder)
            return UpdateBind(x, draw(ty), draw(sub), draw(exprs(vars | {x}, tvars, depth - 1)))
        case 13:
            return UpdateCreate(draw(refs("template")), draw(sub))
        case 14:
            return UpdateFetch(draw(refs("template")), draw(sub))
        case 15:
            return UpdateExercise(draw(refs("template")), draw(st.sampled_from(("Go", "Archive"))), draw(sub), draw(sub))
        case 16:
            return CidLeq(draw(ty), draw(sub), draw(sub))
    return draw(st.one_of(leaf))


# --- packages ----------------------------------------------------------------


@st.composite
def params(draw):
    names = draw(st.lists(st.sampled_from(TVAR_NAMES), max_size=2, unique=True))
    return tuple((n, draw(kinds)) for n in names)


@st.composite
def choices(draw, name: str):
    arg = draw(st.sampled_from(("arg", "newOwner")))
    scope = frozenset({"this", arg})
    return ChoiceDef(
        name=name,
        consuming=draw(st.booleans()),
        arg_var=arg,
        arg_type=draw(types(depth=1)),
        result_type=draw(types(depth=1)),
        controllers=draw(exprs(scope, depth=1)),
        observers=draw(st.one_of(st.just(nil(PARTY_T)), exprs(scope, depth=1))),
        body=draw(exprs(scope, depth=2)),
    )


@st.composite
def modules(draw, name: str):
    names = draw(st.lists(st.sampled_from([f"T{i}" for i in range(4)] + ["Deep.Name"]), max_size=4, unique=True))
    records, variants, templates = [], [], []
    for n in names:
        ps = draw(params())
        tv = frozenset(p for p, _ in ps)
        members = draw(st.lists(st.sampled_from(("f", "g", "amount")), max_size=3, unique=True))
        if draw(st.booleans()):
            records.append(RecordDef(n, ps, tuple((f, draw(types(tv, 2))) for f in members)))
            if draw(st.booleans()):
                cnames = draw(st.lists(st.sampled_from(("Go", "Stop", "Transfer")), max_size=2, unique=True))
                this = frozenset({"this"})
                templates.append(TemplateDef(
                    name=n, param="this",
                    ensure=draw(st.one_of(st.just(Lit(BoolV(True))), exprs(this, depth=1))),
                    signatories=draw(exprs(this, depth=1)),
                    observers=draw(st.one_of(st.just(nil(PARTY_T)), exprs(this, depth=1))),
                    choices=tuple(draw(choices(c)) for c in cnames),
                ))
        else:
            ctors = [m.capitalize() for m in members]
            variants.append(VariantDef(n, ps, tuple((c, draw(types(tv, 2))) for c in ctors)))
    vnames = draw(st.lists(st.sampled_from(("v0", "v1", "helper_2")), max_size=2, unique=True))
    values = tuple(ValueDef(v, draw(types()), draw(exprs())) for v in vnames)
    return Module(name, tuple(records), tuple(variants), values, tuple(templates))


@st.composite
def packages(draw):
    names = draw(st.lists(st.sampled_from(MODULES), min_size=1, max_size=2, unique=True))
    return Package(PKG, tuple(draw(modules(n)) for n in names))


# --- datatype families for serializability ------------------------------------

SER_MODULE = "Ser"


def _sref(i: int) -> QualifiedName:
    return QualifiedName("SerGen", SER_MODULE, f"D{i}")


@st.composite
def _field_type(draw, index: int, arities: list[int], tvars: tuple, depth: int):
    """Field of definition ``index``; may mention earlier definitions freely
    and itself only applied to its own parameters (regular recursion)."""
    opts = ["prim", "var", "list", "cid", "arrow", "update", "forall", "self", "earlier"]
    if depth <= 0:
        opts = ["prim", "var", "self"]
    kind = draw(st.sampled_from(opts))
    if kind == "var" and not tvars:
        kind = "prim"
    if kind == "earlier" and index == 0:
        kind = "list"
    if kind == "prim":
        return Prim(draw(st.sampled_from(_PRIMS)))
    if kind == "var":
        return TVar(draw(st.sampled_from(tvars)))
    if kind == "self":
        t = Named(_sref(index))
        for v in tvars:
            t = TApp(t, TVar(v))
        return t
    sub = _field_type(index, arities, tvars, depth - 1)
    if kind in ("list", "cid", "update"):
        head = {"list": "List", "cid": "ContractId", "update": "Update"}[kind]
        return TApp(Prim(head), draw(sub))
    if kind == "arrow":
        return fn(draw(sub), draw(sub))
    if kind == "forall":
        return Forall("q", STAR, draw(st.one_of(sub, st.just(TVar("q")))))
    j = draw(st.integers(0, index - 1))
    t = Named(_sref(j))
    for _ in range(arities[j]):
        t = TApp(t, draw(sub))
    return t


@st.composite
def datatype_family(draw):
    """A module of up to four ⋆-parameterised records and variants."""
    n = draw(st.integers(1, 4))
    arities = [draw(st.integers(0, 2)) for _ in range(n)]
    records, variants = [], []
    for i, ar in enumerate(arities):
        tvars = TVAR_NAMES[:ar]
        members = tuple((f"m{k}", draw(_field_type(i, arities, tvars, 2))) for k in range(draw(st.integers(0, 3))))
        ps = tuple((v, STAR) for v in tvars)
        if draw(st.booleans()):
            records.append(RecordDef(f"D{i}", ps, members))
        else:
            variants.append(VariantDef(f"D{i}", ps, tuple((f"C{k}", t) for k, (_, t) in enumerate(members))))
    return Package("SerGen", (Module(SER_MODULE, tuple(records), tuple(variants)),)), arities


@st.composite
def ground_types(draw, arities: list[int], depth: int = 6):
    """Closed types over a datatype family, at most ``depth`` constructors deep."""
    if depth <= 1:
        options = ["prim"] + [f"d{i}" for i, a in enumerate(arities) if a == 0]
    else:
        options = ["prim", "list", "cid", "arrow", "update", "forall"] + [f"d{i}" for i in range(len(arities))]
    kind = draw(st.sampled_from(options))
    sub = ground_types(arities, depth - 1)
    if kind == "prim":
        return Prim(draw(st.sampled_from(_PRIMS)))
    if kind in ("list", "cid", "update"):
        return TApp(Prim({"list": "List", "cid": "ContractId", "update": "Update"}[kind]), draw(sub))
    if kind == "arrow":
        return fn(draw(sub), draw(sub))
    if kind == "forall":
        return Forall("a", STAR, draw(st.one_of(sub, st.just(TVar("a")))))
    i = int(kind[1:])
    t = Named(_sref(i))
    for _ in range(arities[i]):
        t = TApp(t, draw(sub))
    return t


# --- transaction trees -------------------------------------------------------

party_sets = st.frozensets(st.sampled_from(PARTIES), max_size=3)
nonempty_party_sets = st.frozensets(st.sampled_from(PARTIES), min_size=1, max_size=3)
_TPL = QualifiedName("Gen", "M", "T")


@st.composite
def actions(draw, depth: int = 3):
    cid = ContractIdV(draw(st.integers(1, 50)))
    kind = draw(st.sampled_from(("create", "fetch", "exercise") if depth > 0 else ("create", "fetch")))
    sig = draw(nonempty_party_sets)
    if kind == "create":
        return CreateA(cid, _TPL, Int64V(draw(st.integers(0, 9))), sig, draw(party_sets))
    if kind == "fetch":
        return FetchA(cid, _TPL, sig, draw(party_sets))
    return ExerciseA(
        cid, _TPL, draw(st.sampled_from(("Go", "Archive"))), UNIT, draw(st.booleans()),
        draw(nonempty_party_sets), draw(party_sets), sig,
        tuple(draw(st.lists(actions(depth - 1), max_size=3))),
    )


transactions = st.lists(actions(), max_size=4).map(tuple)


# --- workflow commands on the playground package ------------------------------
#
# A command is either a create or ("exercise", cid, k, party, n, other, text);
# the driver picks choice k of whatever template the target contract has and
# uses the slot matching that choice's argument type.

CIDS = st.integers(1, 6)
_creates = st.one_of(
    st.tuples(st.just("asset"), st.sampled_from(PARTIES), st.sampled_from(PARTIES), st.integers(0, 6),
              st.lists(st.sampled_from(PARTIES), max_size=2)),
    st.tuples(st.just("minter"), st.sampled_from(PARTIES), st.sampled_from(PARTIES)),
    st.tuples(st.just("joint"), st.sampled_from(PARTIES), st.sampled_from(PARTIES),
              st.text(string.ascii_letters, max_size=5)),
)
_exercises = st.tuples(st.just("exercise"), CIDS, st.integers(0, 4), st.sampled_from(PARTIES),
                       st.integers(-1, 4), CIDS, st.text(string.ascii_letters, max_size=3))
commands = st.integers(0, 3).flatmap(lambda i: _creates if i == 0 else _exercises)

# mostly broad submitter sets, so that many commands get past authorization
_actors = st.one_of(
    st.frozensets(st.sampled_from(PARTIES), min_size=1, max_size=2),
    st.sampled_from(PARTIES).map(lambda p: frozenset(PARTIES) - {p}),
    st.sampled_from(PARTIES).map(lambda p: frozenset(PARTIES) - {p}),
)
# a setup phase submitted by everyone, then arbitrary submissions
workflows = st.tuples(
    st.lists(_creates, min_size=1, max_size=4),
    st.lists(st.tuples(_actors, commands), min_size=2, max_size=10),
).map(lambda p: [(frozenset(PARTIES), c) for c in p[0]] + p[1])
