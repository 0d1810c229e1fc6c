"""In-memory ledger: authorization checking, validation, commit, projection."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LfError, UpdateError, ValidationError
from .interpreter import Interpreter, UpdateResult, command_update
from .packages import World
from .state import ContractInfo, LedgerState
from .transaction import Action, CreateA, ExerciseA, FetchA, Transaction, walk
from .values import ContractIdV, UCreate, UExercise, UFetch, UpdateV, Value


@dataclass(frozen=True)
class Violation:
    path: tuple[int, ...]
    required: frozenset[str]
    available: frozenset[str]

    def __str__(self) -> str:
        at = ".".join(map(str, self.path))
        return (f"node {at}: requires {{{', '.join(sorted(self.required))}}}, "
                f"available {{{', '.join(sorted(self.available))}}}")


def check_authorization(auth, tx: Transaction) -> Violation | None:
    """First pre-order node that is not well-authorized, or None.

    Consequences of an exercise are checked under the contract's signatories
    plus the controllers only; the outer context does not flow inward.
    """
    return _check(frozenset(auth), tx, ())


def _check(auth: frozenset[str], tx: Transaction, path: tuple[int, ...]) -> Violation | None:
    for i, a in enumerate(tx):
        p = path + (i,)
        match a:
            case CreateA(signatories=sig):
                if not sig <= auth:
                    return Violation(p, sig, auth)
            case FetchA(signatories=sig, observers=obs):
                if not auth & (sig | obs):
                    return Violation(p, sig | obs, auth)
            case ExerciseA(controllers=ctl, signatories=sig, consequences=cons):
                if not ctl <= auth:
                    return Violation(p, ctl, auth)
                v = _check(sig | ctl, cons, p)
                if v is not None:
                    return v
    return None


def informees(a: Action) -> frozenset[str]:
    match a:
        case CreateA(signatories=sig, observers=obs) | FetchA(signatories=sig, observers=obs):
            return sig | obs
        case ExerciseA(signatories=sig, controllers=ctl, choice_observers=cobs):
            return sig | ctl | cobs
    raise TypeError(a)


def project(tx: Transaction, party: str) -> Transaction:
    """Keep each action whose informees include ``party`` with its whole
    subtree; otherwise splice in the projection of its consequences."""
    out: list[Action] = []
    for a in tx:
        if party in informees(a):
            out.append(a)
        elif isinstance(a, ExerciseA):
            out.extend(project(a.consequences, party))
    return tuple(out)


def _root_update(a: Action) -> UpdateV:
    match a:
        case CreateA(template=t, arg=arg):
            return UpdateV(UCreate(t, arg))
        case FetchA(cid=cid, template=t):
            return UpdateV(UFetch(t, cid))
        case ExerciseA(cid=cid, template=t, choice=ch, arg=arg):
            return UpdateV(UExercise(t, ch, cid, arg))
    raise TypeError(a)


def _first_difference(expected: Transaction, actual: Transaction, path: tuple[int, ...]) -> tuple[int, ...] | None:
    for i, (e, a) in enumerate(zip(expected, actual)):
        p = path + (i,)
        if isinstance(e, ExerciseA) and isinstance(a, ExerciseA):
            head_e = (e.cid, e.template, e.choice, e.arg, e.consuming, e.controllers,
                      e.choice_observers, e.signatories)
            head_a = (a.cid, a.template, a.choice, a.arg, a.consuming, a.controllers,
                      a.choice_observers, a.signatories)
            if head_e != head_a:
                return p
            d = _first_difference(e.consequences, a.consequences, p)
            if d is not None:
                return d
        elif e != a:
            return p
    if len(expected) != len(actual):
        return path + (min(len(expected), len(actual)),)
    return None


def validate(world: World, tx: Transaction, actors, state: LedgerState) -> LedgerState:
    """Check a recorded transaction against the pre-state by replaying it.

    Each root action is re-interpreted from its recorded inputs with the
    allocator continuing from ``state.next_id``; the replayed subtree must
    equal the recorded one. Returns the post-state.
    """
    actors = frozenset(actors)
    v = check_authorization(actors, tx)
    if v is not None:
        raise ValidationError("AuthorizationError", f"transaction is not well-authorized: {v}", v.path)
    interp = Interpreter(world)
    st = state.copy()
    for i, a in enumerate(tx):
        out: list = []
        try:
            interp.interpret(_root_update(a), st, actors, out, ())
        except ValidationError:
            raise
        except LfError as err:
            raise ValidationError(err.error_class, f"replay of root action {i} failed: {err.message}", (i,)) from None
        replayed = tuple(out)
        diff = _first_difference((a,), replayed, ())
        if diff is not None:
            path = (i,) + diff[1:]
            raise ValidationError("SemanticMismatch",
                                  f"replay differs from the recorded transaction at node {'.'.join(map(str, path))}",
                                  path)
    return st


@dataclass(frozen=True)
class Commit:
    actors: frozenset[str]
    transaction: Transaction
    result: Value


@dataclass
class Ledger:
    world: World
    state: LedgerState = field(default_factory=LedgerState)
    log: list[Commit] = field(default_factory=list)

    def submit(self, actors, cmd, env: dict | None = None, types: dict | None = None) -> UpdateResult:
        """Interpret, validate, then commit atomically; on failure nothing changes."""
        actors = frozenset(actors)
        if not actors:
            raise UpdateError("NoActors", "a submission needs at least one acting party")
        u, _ = command_update(self.world, cmd, self.state, env, types)
        return self.submit_update(actors, u)

    def submit_update(self, actors, u: UpdateV) -> UpdateResult:
        actors = frozenset(actors)
        result = Interpreter(self.world).run(u, self.state, actors)
        post = validate(self.world, result.transaction, actors, self.state)
        if post.contracts != result.state.contracts or post.next_id != result.state.next_id:
            raise ValidationError("SemanticMismatch", "replayed state differs from interpreted state")
        self.state = result.state
        self.log.append(Commit(actors, result.transaction, result.value))
        return result

    def commit_transaction(self, actors, tx: Transaction) -> None:
        """Validate and commit a transaction produced elsewhere."""
        post = validate(self.world, tx, actors, self.state)
        self.state = post
        self.log.append(Commit(frozenset(actors), tx, None))

    def active_contracts(self, template=None, party: str | None = None) -> dict[ContractIdV, ContractInfo]:
        return {
            cid: info for cid, info in sorted(self.state.contracts.items())
            if info.active
            and (template is None or info.template == template)
            and (party is None or party in info.signatories | info.observers)
        }

    def view(self, party: str) -> list[Transaction]:
        """The party's projection of every commit, skipping empty ones."""
        return [p for c in self.log if (p := project(c.transaction, party))]

    def replay(self) -> LedgerState:
        """Fold the committed log over a fresh state."""
        fresh = Ledger(self.world)
        for c in self.log:
            fresh.commit_transaction(c.actors, c.transaction)
        return fresh.state


def authority_uses(tx: Transaction) -> list[tuple[tuple[int, ...], Action]]:
    """Nodes that use a signatory's authority: creates and consuming exercises."""
    return [(p, a) for p, a in walk(tx)
            if isinstance(a, CreateA) or (isinstance(a, ExerciseA) and a.consuming)]
