"""Transaction trees: Create, Exercise (with consequences), and Fetch actions."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

from .ast import QualifiedName
from .values import ContractIdV, Value, render_value, value_from_json, value_to_json


@dataclass(frozen=True)
class CreateA:
    cid: ContractIdV
    template: QualifiedName
    arg: Value
    signatories: frozenset[str]
    observers: frozenset[str]


@dataclass(frozen=True)
class ExerciseA:
    cid: ContractIdV
    template: QualifiedName
    choice: str
    arg: Value
    consuming: bool
    controllers: frozenset[str]
    choice_observers: frozenset[str]
    signatories: frozenset[str]
    consequences: tuple[Action, ...]


@dataclass(frozen=True)
class FetchA:
    cid: ContractIdV
    template: QualifiedName
    signatories: frozenset[str]
    observers: frozenset[str]


Action = CreateA | ExerciseA | FetchA
Transaction = tuple[Action, ...]


def walk(tx: Transaction, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Action]]:
    """Pre-order traversal yielding (node path, action)."""
    for i, a in enumerate(tx):
        p = path + (i,)
        yield p, a
        if isinstance(a, ExerciseA):
            yield from walk(a.consequences, p)


def _template_name(ref: QualifiedName) -> str:
    return f"{ref.module}:{ref.name}"


def _set(label: str, parties: frozenset[str]) -> str:
    return f" {label}={{{', '.join(sorted(parties))}}}" if parties else ""


def render_action(a: Action) -> str:
    match a:
        case CreateA(cid, t, arg, sig, obs):
            return f"Create {cid} {_template_name(t)} {render_value(arg)}{_set('sig', sig)}{_set('obs', obs)}"
        case ExerciseA(cid, t, ch, arg, consuming, ctl, cobs, sig, _):
            kind = "" if consuming else " nonconsuming"
            return (
                f"Exercise{kind} {cid} {_template_name(t)}.{ch} {render_value(arg)}"
                f"{_set('ctl', ctl)}{_set('cobs', cobs)}{_set('sig', sig)}"
            )
        case FetchA(cid, t, sig, obs):
            return f"Fetch {cid} {_template_name(t)}{_set('sig', sig)}{_set('obs', obs)}"
    raise TypeError(a)


def render_tree(tx: Transaction, indent: int = 0) -> str:
    """Indented text, one action per line, consequences two spaces deeper."""
    lines = []
    for path, a in walk(tx):
        lines.append("  " * (indent + len(path) - 1) + render_action(a))
    return "\n".join(lines) + ("\n" if lines else "")


def action_to_json(a: Action) -> dict:
    base = {"cid": a.cid.index, "template": str(a.template)}
    match a:
        case CreateA():
            return {"kind": "Create", **base, "arg": value_to_json(a.arg),
                    "signatories": sorted(a.signatories), "observers": sorted(a.observers)}
        case ExerciseA():
            return {"kind": "Exercise", **base, "choice": a.choice, "arg": value_to_json(a.arg),
                    "consuming": a.consuming, "controllers": sorted(a.controllers),
                    "choice_observers": sorted(a.choice_observers),
                    "signatories": sorted(a.signatories),
                    "consequences": [action_to_json(c) for c in a.consequences]}
        case FetchA():
            return {"kind": "Fetch", **base, "signatories": sorted(a.signatories),
                    "observers": sorted(a.observers)}
    raise TypeError(a)


def action_from_json(obj: dict) -> Action:
    cid = ContractIdV(obj["cid"])
    t = QualifiedName.parse(obj["template"])
    match obj["kind"]:
        case "Create":
            return CreateA(cid, t, value_from_json(obj["arg"]), frozenset(obj["signatories"]),
                           frozenset(obj["observers"]))
        case "Exercise":
            return ExerciseA(cid, t, obj["choice"], value_from_json(obj["arg"]), obj["consuming"],
                             frozenset(obj["controllers"]), frozenset(obj["choice_observers"]),
                             frozenset(obj["signatories"]),
                             tuple(action_from_json(c) for c in obj["consequences"]))
        case "Fetch":
            return FetchA(cid, t, frozenset(obj["signatories"]), frozenset(obj["observers"]))
    raise ValueError(f"unknown action kind {obj['kind']!r}")
