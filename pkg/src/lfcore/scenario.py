"""Running scenario scripts against a fresh ledger."""

from __future__ import annotations

import json
import re
from collections.abc import Callable
from dataclasses import asdict, dataclass, field

from .ast import Named, QualifiedName, contract_id_of
from .errors import LfError, ScenarioError
from .ledger import Ledger, project
from .packages import World
from .parser import (
    AssertActive,
    AssertArchived,
    Project,
    Scenario,
    SketchNode,
    Submit,
    SubmitMustFail,
)
from .transaction import Action, CreateA, ExerciseA, Transaction, render_tree
from .values import ContractIdV, Value, render_value


@dataclass
class StepResult:
    index: int
    kind: str
    ok: bool
    detail: str = ""
    tree: str | None = None


@dataclass
class ActiveContract:
    cid: int
    template: str
    arg: str


@dataclass
class RunReport:
    steps: list[StepResult] = field(default_factory=list)
    active: list[ActiveContract] = field(default_factory=list)
    exit_code: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        obj = json.loads(text)
        return cls(
            steps=[StepResult(**s) for s in obj["steps"]],
            active=[ActiveContract(**a) for a in obj["active"]],
            exit_code=obj["exit_code"],
        )


def _same_ref(expected: QualifiedName, actual: QualifiedName) -> bool:
    return (expected.module, expected.name) == (actual.module, actual.name) and (
        expected.package is None or expected.package == actual.package)


class _Runner:
    def __init__(self, world: World, on_commit: Callable[[int, frozenset, Transaction], None] | None):
        self.ledger = Ledger(world)
        self.env: dict[str, Value] = {}
        self.types: dict = {}
        self.last: Transaction | None = None
        self.on_commit = on_commit

    def cid(self, ref: str) -> ContractIdV:
        if ref.startswith("#"):
            return ContractIdV(int(ref[1:]))
        v = self.env.get(ref)
        if not isinstance(v, ContractIdV):
            raise ScenarioError(f"{ref} is not bound to a contract id")
        return v

    def sketch_matches(self, s: SketchNode, a: Action) -> bool:
        if s.kind != type(a).__name__[:-1]:
            return False
        if s.cid != "_" and self.cid(s.cid) != a.cid:
            return False
        if not _same_ref(s.template, a.template):
            return False
        if isinstance(a, ExerciseA):
            return s.choice == a.choice and self.forest_matches(s.children, a.consequences)
        return True

    def forest_matches(self, sketch, tx: Transaction) -> bool:
        return len(sketch) == len(tx) and all(self.sketch_matches(s, a) for s, a in zip(sketch, tx))

    def step(self, i: int, step) -> StepResult:
        if isinstance(step, Submit):
            result = self.ledger.submit(step.actors, step.command, self.env, self.types)
            self.last = result.transaction
            if self.on_commit:
                self.on_commit(len(self.ledger.log), frozenset(step.actors), result.transaction)
            if step.bind:
                self.env[step.bind] = result.value
                self.types[step.bind] = self._result_type(step, result)
            return StepResult(i, "submit", True, render_value(result.value), render_tree(result.transaction))
        if isinstance(step, SubmitMustFail):
            try:
                result = self.ledger.submit(step.actors, step.command, self.env, self.types)
            except LfError as err:
                if err.error_class == step.expected:
                    return StepResult(i, "submit-must-fail", True, f"{err.error_class}: {err.message}")
                return StepResult(i, "submit-must-fail", False,
                                  f"expected {step.expected}, got {err.error_class}: {err.message}")
            self.last = result.transaction
            if self.on_commit:
                self.on_commit(len(self.ledger.log), frozenset(step.actors), result.transaction)
            return StepResult(i, "submit-must-fail", False, f"expected {step.expected}, but the submission committed",
                              render_tree(result.transaction))
        if isinstance(step, AssertActive):
            cid = self.cid(step.cid_ref)
            info = self.ledger.state.contracts.get(cid)
            ok = info is not None and info.active and _same_ref(step.template, info.template)
            what = "missing" if info is None else f"{info.template} {'active' if info.active else 'archived'}"
            return StepResult(i, "assert-active", ok, f"{cid}: {what}")
        if isinstance(step, AssertArchived):
            cid = self.cid(step.cid_ref)
            info = self.ledger.state.contracts.get(cid)
            ok = info is not None and not info.active
            what = "missing" if info is None else ("archived" if not info.active else "active")
            return StepResult(i, "assert-archived", ok, f"{cid}: {what}")
        if isinstance(step, Project):
            if self.last is None:
                return StepResult(i, "project", False, "no transaction has been committed yet")
            view = project(self.last, step.party)
            ok = self.forest_matches(step.expected, view)
            return StepResult(i, "project", ok, f"view of {step.party}", render_tree(view))
        raise TypeError(step)

    def _result_type(self, step: Submit, result):
        # every command yields exactly one root action
        root = result.transaction[0]
        if isinstance(root, CreateA):
            return contract_id_of(Named(root.template))
        return self.ledger.world.template(root.template).choice(root.choice).result_type


def run_scenario(world: World, scenario: Scenario,
                 on_commit: Callable[[int, frozenset, Transaction], None] | None = None,
                 ) -> tuple[RunReport, Ledger]:
    """Execute steps in order, stopping at the first failing step."""
    runner = _Runner(world, on_commit)
    report = RunReport()
    for i, step in enumerate(scenario.steps, 1):
        try:
            res = runner.step(i, step)
        except LfError as err:
            kind = re.sub(r"(?<!^)([A-Z])", r"-\1", type(step).__name__).lower()
            res = StepResult(i, kind, False, f"{err.error_class}: {err.message}")
        report.steps.append(res)
        if not res.ok:
            report.exit_code = 2
            break
    report.active = [
        ActiveContract(cid.index, str(info.template), render_value(info.arg))
        for cid, info in runner.ledger.active_contracts().items()
    ]
    return report, runner.ledger
