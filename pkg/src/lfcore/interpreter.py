"""Call-by-value evaluation and interpretation of ledger updates.

``Evaluator`` is a CEK-style machine: a control expression, an environment,
and an explicit continuation stack, so deep recursion in the object language
does not consume Python stack. Type variables live in the environment under
``@name`` so that type arguments recorded on data values can be resolved.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .ast import (
    App,
    Builtin,
    Case,
    CidLeq,
    Expr,
    Lam,
    Lit,
    PBool,
    PCons,
    PDefault,
    PNil,
    PUnit,
    PVariant,
    QualifiedName,
    RecCon,
    RecProj,
    RecUpd,
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
    contract_id_of,
    free_type_vars,
    substitute_types,
)
from .errors import AuthorizationError, EvalError, LfError, LfTypeError, UpdateError
from .numeric import Numeric, check_int64
from .packages import World, map_refs
from .state import ContractInfo, LedgerState
from .transaction import CreateA, ExerciseA, FetchA, Transaction
from .values import (
    FALSE,
    TRUE,
    BoolV,
    Closure,
    ContractIdV,
    DecimalV,
    Int64V,
    ListV,
    PartyV,
    RecV,
    TextV,
    TyClosure,
    UBind,
    UCreate,
    UExercise,
    UFetch,
    UnitV,
    UpdateV,
    UPure,
    Value,
    VarV,
    compare_values,
)


class TypeConfusion(LfError):
    """Raised only if a well-typed program goes wrong; indicates a checker bug."""

    error_class = "TypeConfusion"


def _confused(what: str) -> TypeConfusion:
    return TypeConfusion(f"runtime type confusion: {what}")


# --- builtins ----------------------------------------------------------------------


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("Int64 division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _int_mod(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("Int64 modulo by zero")
    return a - b * _int_div(a, b)


_INT_OPS = {
    "ADD_INT64": lambda a, b: a + b,
    "SUB_INT64": lambda a, b: a - b,
    "MUL_INT64": lambda a, b: a * b,
    "DIV_INT64": _int_div,
    "MOD_INT64": _int_mod,
}
_DEC_OPS = {
    "ADD_DECIMAL": lambda a, b: a + b,
    "SUB_DECIMAL": lambda a, b: a - b,
    "MUL_DECIMAL": lambda a, b: a * b,
    "DIV_DECIMAL": lambda a, b: a / b,
}
_CMP_OPS = {
    "EQUAL": lambda c: c == 0,
    "LESS": lambda c: c < 0,
    "LESS_EQ": lambda c: c <= 0,
    "GREATER": lambda c: c > 0,
    "GREATER_EQ": lambda c: c >= 0,
}


def _bool(b: bool) -> BoolV:
    return TRUE if b else FALSE


def call_builtin(name: str, vals: tuple) -> Value:
    """First-order builtins; FOLDL and FOLDR are handled by the machine."""
    try:
        if name in _INT_OPS:
            return Int64V(check_int64(_INT_OPS[name](vals[0].value, vals[1].value)))
        if name in _DEC_OPS:
            return DecimalV(_DEC_OPS[name](vals[0].value, vals[1].value))
        if name in _CMP_OPS:
            return _bool(_CMP_OPS[name](compare_values(vals[0], vals[1])))
        match name:
            case "INT64_TO_DECIMAL":
                return DecimalV(Numeric.from_int(vals[0].value))
            case "DECIMAL_TO_INT64":
                return Int64V(check_int64(vals[0].value.to_int()))
            case "NOT":
                return _bool(not vals[0].value)
            case "AND":
                return _bool(vals[0].value and vals[1].value)
            case "OR":
                return _bool(vals[0].value or vals[1].value)
            case "APPEND_TEXT":
                return TextV(vals[0].value + vals[1].value)
            case "INT64_TO_TEXT":
                return TextV(str(vals[0].value))
            case "DECIMAL_TO_TEXT":
                return TextV(str(vals[0].value))
            case "PARTY_TO_TEXT":
                return TextV(vals[0].name)
            case "NIL":
                return ListV(())
            case "CONS":
                return ListV((vals[0],) + vals[1].items)
            case "APPEND_LIST":
                return ListV(vals[0].items + vals[1].items)
            case "ERROR":
                raise EvalError(vals[0].value, error_class="UserError")
    except AttributeError as e:
        raise _confused(f"bad operand for {name}: {e}") from None
    raise _confused(f"unknown builtin {name}")


# --- expression evaluation ---------------------------------------------------------


def _resolve_types(types: tuple[Type, ...], env: dict) -> tuple[Type, ...]:
    if not types:
        return types
    out = []
    for t in types:
        fv = free_type_vars(t)
        mapping = {v: env["@" + v] for v in fv if "@" + v in env}
        out.append(substitute_types(t, mapping) if mapping else t)
    return tuple(out)


def _match(pat, v: Value):
    """Return the bindings of a successful match, else None."""
    if isinstance(pat, PDefault):
        return {}
    if isinstance(pat, PVariant):
        if isinstance(v, VarV) and v.variant == pat.variant:
            return {pat.binder: v.value}
        return None
    if isinstance(pat, PBool):
        return {} if isinstance(v, BoolV) and v.value == pat.value else None
    if isinstance(pat, PUnit):
        return {} if isinstance(v, UnitV) else None
    if isinstance(pat, PNil):
        return {} if isinstance(v, ListV) and not v.items else None
    if isinstance(pat, PCons):
        if isinstance(v, ListV) and v.items:
            return {pat.head: v.items[0], pat.tail: ListV(v.items[1:])}
        return None
    raise _confused(f"pattern {pat!r}")


class Evaluator:
    def __init__(self, world: World, max_steps: int | None = None):
        self.world = world
        self.max_steps = max_steps
        self.steps = 0

    def eval(self, expr: Expr, env: dict | None = None) -> Value:
        env = {} if env is None else env
        stack: list[tuple] = []
        ctrl: Expr | None = expr
        val: Value = None  # type: ignore[assignment]
        world = self.world
        while True:
            self.steps += 1
            if self.max_steps is not None and self.steps > self.max_steps:
                raise EvalError("evaluation step limit exceeded", error_class="StepLimit")
            if ctrl is not None:
                e, ctrl = ctrl, None
                t = type(e)
                if t is Var:
                    try:
                        val = env[e.name]
                    except KeyError:
                        raise _confused(f"unbound variable {e.name}") from None
                elif t is Lit:
                    val = e.value
                elif t is App:
                    stack.append(("arg", e.arg, env))
                    ctrl = e.fun
                    continue
                elif t is Lam:
                    val = Closure(env, e.var, e.body)
                elif t is ValRef:
                    d = world.value(e.ref)
                    if d is None:
                        raise _confused(f"unknown value {e.ref}")
                    ctrl, env = d.body, {}
                    continue
                elif t is Builtin:
                    if not e.args:
                        val = call_builtin(e.name, ())
                    else:
                        stack.append(("bargs", e, env, ()))
                        ctrl = e.args[0]
                        continue
                elif t is TyLam:
                    val = TyClosure(env, e.var, e.body)
                elif t is TyApp:
                    stack.append(("tyapp", _resolve_types((e.arg,), env)[0]))
                    ctrl = e.fun
                    continue
                elif t is RecCon:
                    if not e.fields:
                        val = RecV(e.ref, (), _resolve_types(e.type_args, env))
                    else:
                        stack.append(("rec", e, env, ()))
                        ctrl = e.fields[0][1]
                        continue
                elif t is RecProj:
                    stack.append(("proj", e.field))
                    ctrl = e.arg
                    continue
                elif t is RecUpd:
                    stack.append(("upd1", e.field, e.value, env))
                    ctrl = e.record
                    continue
                elif t is VarCon:
                    stack.append(("con", e.ref, _resolve_types(e.type_args, env), e.variant))
                    ctrl = e.arg
                    continue
                elif t is Case:
                    stack.append(("case", e.alts, env))
                    ctrl = e.scrutinee
                    continue
                elif t is UpdatePure:
                    stack.append(("pure", _resolve_types((e.type,), env)[0]))
                    ctrl = e.expr
                    continue
                elif t is UpdateBind:
                    stack.append(("bind", e, env))
                    ctrl = e.bound
                    continue
                elif t is UpdateCreate:
                    stack.append(("create", e.template))
                    ctrl = e.arg
                    continue
                elif t is UpdateFetch:
                    stack.append(("fetch", e.template))
                    ctrl = e.cid
                    continue
                elif t is UpdateExercise:
                    stack.append(("ex1", e, env))
                    ctrl = e.cid
                    continue
                elif t is CidLeq:
                    stack.append(("leq1", e.rhs, env))
                    ctrl = e.lhs
                    continue
                else:
                    raise _confused(f"not an expression: {e!r}")

            # return mode: feed ``val`` to the top frame
            if not stack:
                return val
            frame = stack.pop()
            tag = frame[0]
            if tag == "arg":
                stack.append(("call", val))
                ctrl, env = frame[1], frame[2]
            elif tag == "call":
                f = frame[1]
                if type(f) is not Closure:
                    raise _confused("applying a non-function")
                ctrl, env = f.body, {**f.env, f.var: val}
            elif tag == "apply_to":
                if type(val) is not Closure:
                    raise _confused("applying a non-function")
                ctrl, env = val.body, {**val.env, val.var: frame[1]}
            elif tag == "tyapp":
                if type(val) is not TyClosure:
                    raise _confused("type application of a non-polymorphic value")
                ctrl, env = val.body, {**val.env, "@" + val.var: frame[1]}
            elif tag == "bargs":
                e, benv, done = frame[1], frame[2], frame[3] + (val,)
                if len(done) < len(e.args):
                    stack.append(("bargs", e, benv, done))
                    ctrl, env = e.args[len(done)], benv
                elif e.name == "FOLDL":
                    f, items = done[0], done[2].items
                    stack.append(("foldl", f, items, 0))
                    val = done[1]
                elif e.name == "FOLDR":
                    f, items = done[0], done[2].items
                    stack.append(("foldr", f, items, len(items) - 1))
                    val = done[1]
                else:
                    val = call_builtin(e.name, done)
            elif tag == "foldl":
                f, items, i = frame[1], frame[2], frame[3]
                if i < len(items):
                    # acc' = (f acc) x_i
                    stack.append(("foldl", f, items, i + 1))
                    stack.append(("apply_to", items[i]))
                    if type(f) is not Closure:
                        raise _confused("FOLDL with a non-function")
                    ctrl, env = f.body, {**f.env, f.var: val}
            elif tag == "foldr":
                f, items, i = frame[1], frame[2], frame[3]
                if i >= 0:
                    # acc' = (f x_i) acc
                    stack.append(("foldr", f, items, i - 1))
                    stack.append(("apply_to", val))
                    if type(f) is not Closure:
                        raise _confused("FOLDR with a non-function")
                    ctrl, env = f.body, {**f.env, f.var: items[i]}
            elif tag == "rec":
                e, renv, done = frame[1], frame[2], frame[3] + (val,)
                if len(done) < len(e.fields):
                    stack.append(("rec", e, renv, done))
                    ctrl, env = e.fields[len(done)][1], renv
                else:
                    names = tuple(f for f, _ in e.fields)
                    val = RecV(e.ref, tuple(zip(names, done)), _resolve_types(e.type_args, renv))
            elif tag == "proj":
                if type(val) is not RecV:
                    raise _confused("projection from a non-record")
                val = val.get(frame[1])
            elif tag == "upd1":
                stack.append(("upd2", frame[1], val))
                ctrl, env = frame[2], frame[3]
            elif tag == "upd2":
                rec, name = frame[2], frame[1]
                if type(rec) is not RecV:
                    raise _confused("update of a non-record")
                val = replace(rec, fields=tuple((f, val if f == name else v) for f, v in rec.fields))
            elif tag == "con":
                val = VarV(frame[1], frame[3], val, frame[2])
            elif tag == "case":
                for alt in frame[1]:
                    binds = _match(alt.pattern, val)
                    if binds is not None:
                        ctrl, env = alt.body, {**frame[2], **binds} if binds else frame[2]
                        break
                else:
                    raise EvalError("incomplete case match", error_class="MatchFailure")
            elif tag == "pure":
                val = UpdateV(UPure(frame[1], val))
            elif tag == "bind":
                e, benv = frame[1], frame[2]
                if type(val) is not UpdateV:
                    raise _confused("bind of a non-update")
                val = UpdateV(UBind(e.var, e.type, val, e.body, benv))
            elif tag == "create":
                val = UpdateV(UCreate(frame[1], val))
            elif tag == "fetch":
                if type(val) is not ContractIdV:
                    raise _confused("fetch of a non-contract-id")
                val = UpdateV(UFetch(frame[1], val))
            elif tag == "ex1":
                stack.append(("ex2", frame[1], val))
                ctrl, env = frame[1].arg, frame[2]
            elif tag == "ex2":
                e, cid = frame[1], frame[2]
                if type(cid) is not ContractIdV:
                    raise _confused("exercise on a non-contract-id")
                val = UpdateV(UExercise(e.template, e.choice, cid, val))
            elif tag == "leq1":
                stack.append(("leq2", val))
                ctrl, env = frame[1], frame[2]
            elif tag == "leq2":
                a, b = frame[1], val
                if type(a) is not ContractIdV or type(b) is not ContractIdV:
                    raise _confused("cid_leq on non-contract-ids")
                val = _bool(a.index <= b.index)
            else:
                raise _confused(f"unknown frame {tag}")


def eval_expr(world: World, e: Expr, env: dict | None = None) -> Value:
    return Evaluator(world).eval(e, env)


# --- update interpretation --------------------------------------------------------


@dataclass(frozen=True)
class UpdateResult:
    value: Value
    transaction: Transaction
    state: LedgerState


def parties(v: Value) -> frozenset[str]:
    if type(v) is not ListV or not all(type(p) is PartyV for p in v.items):
        raise _confused("expected a list of parties")
    return frozenset(p.name for p in v.items)


class Interpreter:
    """Interprets suspended updates against a mutable working copy of the state."""

    def __init__(self, world: World, evaluator: Evaluator | None = None):
        self.world = world
        self.ev = evaluator or Evaluator(world)

    def run(self, u: UpdateV, state: LedgerState, auth: frozenset[str]) -> UpdateResult:
        st = state.copy()
        out: list = []
        v = self.interpret(u, st, frozenset(auth), out, ())
        return UpdateResult(v, tuple(out), st)

    def interpret(self, u: UpdateV, st: LedgerState, auth: frozenset[str], out: list,
                  path: tuple[int, ...]) -> Value:
        while True:
            if type(u) is not UpdateV:
                raise _confused("interpreting a non-update")
            x = u.update
            t = type(x)
            if t is UPure:
                return x.value
            if t is UBind:
                v = self.interpret(x.bound, st, auth, out, path)
                u = self.ev.eval(x.body, {**x.env, x.var: v})
                continue
            node_path = path + (len(out),)
            if t is UCreate:
                return self.create(x.template, x.arg, st, auth, out, node_path)
            if t is UFetch:
                return self.fetch(x.template, x.cid, st, auth, out, node_path)
            if t is UExercise:
                return self.exercise(x, st, auth, out, node_path)
            raise _confused(f"unknown update {x!r}")

    def _template(self, ref: QualifiedName):
        tdef = self.world.template(ref)
        if tdef is None:
            raise UpdateError("UnknownTemplate", f"unknown template {ref}")
        return tdef

    def lookup(self, st: LedgerState, cid: ContractIdV, template: QualifiedName) -> ContractInfo:
        info = st.contracts.get(cid)
        if info is None:
            raise UpdateError("ContractNotFound", f"contract {cid} does not exist")
        if info.template != template:
            raise UpdateError("TemplateMismatch", f"contract {cid} is a {info.template}, not a {template}")
        if not info.active:
            raise UpdateError("ContractArchived", f"contract {cid} is archived")
        return info

    def create(self, template, arg, st, auth, out, path) -> ContractIdV:
        tdef = self._template(template)
        env = {tdef.param: arg}
        ok = self.ev.eval(tdef.ensure, env)
        if ok != TRUE:
            raise UpdateError("EnsureFailed", f"ensure clause of {template} failed")
        sig = parties(self.ev.eval(tdef.signatories, env))
        obs = parties(self.ev.eval(tdef.observers, env))
        if not sig:
            raise UpdateError("EmptySignatories", f"contract of {template} would have no signatories")
        missing = sig - auth
        if missing:
            raise AuthorizationError(
                f"create of {template} needs authorization from {', '.join(sorted(missing))}",
                frozenset(missing), path)
        cid = st.allocate()
        st.contracts[cid] = ContractInfo(template, arg, sig, obs, True)
        out.append(CreateA(cid, template, arg, sig, obs))
        return cid

    def fetch(self, template, cid, st, auth, out, path) -> Value:
        info = self.lookup(st, cid, template)
        stakeholders = info.signatories | info.observers
        if not auth & stakeholders:
            raise AuthorizationError(
                f"fetch of {cid} needs authorization from one of {', '.join(sorted(stakeholders))}",
                frozenset(stakeholders), path)
        out.append(FetchA(cid, template, info.signatories, info.observers))
        return info.arg

    def exercise(self, x: UExercise, st, auth, out, path) -> Value:
        info = self.lookup(st, x.cid, x.template)
        tdef = self._template(x.template)
        choice = tdef.choice(x.choice)
        if choice is None:
            raise UpdateError("UnknownChoice", f"template {x.template} has no choice {x.choice}")
        env = {tdef.param: info.arg, choice.arg_var: x.arg}
        ctl = parties(self.ev.eval(choice.controllers, env))
        cobs = parties(self.ev.eval(choice.observers, env))
        missing = ctl - auth
        if missing:
            raise AuthorizationError(
                f"exercise of {x.choice} on {x.cid} needs authorization from {', '.join(sorted(missing))}",
                frozenset(missing), path)
        if choice.consuming:
            st.archive(x.cid)
        body = self.ev.eval(choice.body, env)
        sub: list = []
        v = self.interpret(body, st, info.signatories | ctl, sub, path)
        out.append(ExerciseA(
            x.cid, x.template, x.choice, x.arg, choice.consuming, ctl, cobs,
            info.signatories, tuple(sub),
        ))
        return v


def interpret_update(world: World, u: UpdateV, state: LedgerState, auth) -> UpdateResult:
    return Interpreter(world).run(u, state, frozenset(auth))


# --- commands ----------------------------------------------------------------------


def resolve_expr(world: World, e):
    return map_refs(e, world.resolve)


def command_update(world: World, cmd, state: LedgerState, env: dict | None = None,
                   types: dict | None = None) -> tuple[UpdateV, Type]:
    """Turn a scenario command into the update it denotes and its result type.

    Argument expressions are resolved against the loaded packages and
    typechecked before evaluation.
    """
    from .ast import Named
    from .parser import CreateCommand, ExerciseCommand
    from .typecheck import Context, type_of

    env = env or {}
    ctx = Context(world, {}, dict(types or {}))
    ev = Evaluator(world)
    if isinstance(cmd, CreateCommand):
        ref = world.resolve(cmd.template)
        if world.template(ref) is None:
            raise LfTypeError(f"unknown template {ref}", None, "UnknownRef")
        arg = resolve_expr(world, cmd.arg)
        at = type_of(ctx, arg)
        if at != Named(ref):
            from .parser import pretty_type

            raise LfTypeError(f"create argument has type {pretty_type(at)}, expected {ref}", None)
        return UpdateV(UCreate(ref, ev.eval(arg, env))), contract_id_of(Named(ref))
    if isinstance(cmd, ExerciseCommand):
        cid_e = resolve_expr(world, cmd.cid)
        cid = ev.eval(cid_e, env)
        if type(cid) is not ContractIdV:
            raise LfTypeError("exercise target is not a contract id", None)
        info = state.contracts.get(cid)
        if info is None:
            raise UpdateError("ContractNotFound", f"contract {cid} does not exist")
        choice = world.template(info.template).choice(cmd.choice)
        if choice is None:
            raise UpdateError("UnknownChoice", f"template {info.template} has no choice {cmd.choice}")
        arg = resolve_expr(world, cmd.arg)
        from .ast import alpha_equal
        from .parser import pretty_type

        at = type_of(ctx, arg)
        if not alpha_equal(at, choice.arg_type):
            raise LfTypeError(
                f"choice argument has type {pretty_type(at)}, expected {pretty_type(choice.arg_type)}", None)
        return UpdateV(UExercise(info.template, cmd.choice, cid, ev.eval(arg, env))), choice.result_type
    raise TypeError(f"not a command: {cmd!r}")


def run_command(world: World, cmd, actors, state: LedgerState, env: dict | None = None,
                types: dict | None = None) -> UpdateResult:
    u, _ = command_update(world, cmd, state, env, types)
    return interpret_update(world, u, state, frozenset(actors))


__all__ = [
    "Evaluator",
    "Interpreter",
    "TypeConfusion",
    "UpdateResult",
    "call_builtin",
    "command_update",
    "eval_expr",
    "interpret_update",
    "parties",
    "run_command",
]
