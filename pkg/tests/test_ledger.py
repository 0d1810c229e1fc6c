from dataclasses import replace

import pytest
from conftest import CORPUS
from helpers import run

from lfcore.ast import QualifiedName
from lfcore.errors import ValidationError
from lfcore.ledger import Ledger, check_authorization, informees, project, validate
from lfcore.parser import parse_scenario
from lfcore.scenario import run_scenario
from lfcore.state import LedgerState
from lfcore.transaction import CreateA, ExerciseA, FetchA
from lfcore.values import ContractIdV, PartyV, TextV

SWAP = (CORPUS / "swap.lfs").read_text()
IOU = QualifiedName("Basic", "Iou", "Iou")


@pytest.fixture(scope="module")
def swapped(world):
    report, ledger = run_scenario(world, parse_scenario(SWAP))
    assert report.exit_code == 0
    idx = next(i for i, c in enumerate(ledger.log)
               if isinstance(c.transaction[0], ExerciseA) and c.transaction[0].choice == "Settle")
    pre = Ledger(world)
    for c in ledger.log[:idx]:
        pre.commit_transaction(c.actors, c.transaction)
    return ledger, ledger.log[idx], pre.state


def test_validate_accepts_recorded(world, swapped):
    ledger, settle, pre = swapped
    post = validate(world, settle.transaction, settle.actors, pre)
    assert post.status_map() == ledger.state.status_map()


def test_validate_rejects_wrong_signatories(world, swapped):
    _, settle, pre = swapped
    (root,) = settle.transaction
    fetch, t1, t2 = root.consequences
    bad_create = replace(t1.consequences[0], signatories=frozenset({"A"}))
    bad = (replace(root, consequences=(fetch, replace(t1, consequences=(bad_create,)), t2)),)
    with pytest.raises(ValidationError) as info:
        validate(world, bad, settle.actors, pre)
    assert info.value.error_class == "SemanticMismatch" and info.value.path == (0, 1, 0)


def test_validate_rejects_wrong_argument(world, swapped):
    _, settle, pre = swapped
    (root,) = settle.transaction
    bad = (replace(root, arg=ContractIdV(2)),)
    with pytest.raises(ValidationError) as info:
        validate(world, bad, settle.actors, pre)
    # replaying Settle with #2 as the responder's IOU trips the body's own check
    assert info.value.error_class == "UserError" and info.value.path == (0,)


def test_validate_rejects_dropped_node(world, swapped):
    _, settle, pre = swapped
    (root,) = settle.transaction
    bad = (replace(root, consequences=root.consequences[1:]),)
    with pytest.raises(ValidationError) as info:
        validate(world, bad, settle.actors, pre)
    assert info.value.error_class == "SemanticMismatch" and info.value.path == (0, 0)


def test_validate_rejects_wrong_actors(world, swapped):
    _, settle, pre = swapped
    with pytest.raises(ValidationError) as info:
        validate(world, settle.transaction, {"D"}, pre)
    assert info.value.error_class == "AuthorizationError" and info.value.path == (0,)


def test_validate_rejects_double_spend(world, swapped):
    ledger, settle, _ = swapped
    with pytest.raises(ValidationError) as info:
        validate(world, settle.transaction, settle.actors, ledger.state)
    assert info.value.error_class == "ContractArchived"


def test_commit_and_replay(world, swapped):
    ledger, _, _ = swapped
    assert ledger.replay() == ledger.state


def test_views_per_party(world, swapped):
    ledger, _, _ = swapped
    assert ledger.view("E") == []
    b_views = ledger.view("B")
    assert isinstance(b_views[0][0], CreateA)
    assert all(t for t in b_views)


def test_active_contract_filters(world, swapped):
    ledger, _, _ = swapped
    ious = ledger.active_contracts(template=IOU)
    assert sorted(c.index for c in ious) == [5, 6]
    assert sorted(c.index for c in ledger.active_contracts(party="B")) == [6]
    assert ledger.active_contracts(party="Nobody") == {}


def test_informees():
    c = CreateA(ContractIdV(1), IOU, TextV("x"), frozenset("A"), frozenset("B"))
    f = FetchA(ContractIdV(1), IOU, frozenset("A"), frozenset("B"))
    e = ExerciseA(ContractIdV(1), IOU, "Go", PartyV("Q"), True, frozenset("C"), frozenset("D"), frozenset("A"), (c,))
    assert informees(c) == informees(f) == {"A", "B"}
    assert informees(e) == {"A", "C", "D"}  # observers of the contract are not informed of exercises
    assert project((e,), "B") == (c,)
    assert project((e,), "D") == (e,)


def test_authorization_does_not_flow_inward():
    inner = CreateA(ContractIdV(2), IOU, TextV("x"), frozenset({"A", "X"}), frozenset())
    e = ExerciseA(ContractIdV(1), IOU, "Go", PartyV("Q"), True, frozenset("C"), frozenset(), frozenset("A"), (inner,))
    assert check_authorization({"C", "X"}, (e,)).path == (0, 0)
    assert check_authorization({"C"}, (replace(e, controllers=frozenset({"C", "X"})),)) is not None
    assert check_authorization({"C", "X"}, (replace(e, controllers=frozenset({"C", "X"})),)) is None


def test_fetch_authorization():
    f = FetchA(ContractIdV(1), IOU, frozenset("A"), frozenset("B"))
    assert check_authorization({"B"}, (f,)) is None
    assert check_authorization({"C"}, (f,)).path == (0,)


def test_failed_commit_changes_nothing(world):
    report, ledger = run(world, "(submit (Bank) (create Iou:SimpleIou "
                         "(record Iou:SimpleIou (issuer 'Bank) (owner 'A) "
                         "(cash (record Iou:Cash (currency \"USD\") (amount 1.0))))) x)")
    assert report.exit_code == 0
    before = (ledger.state, list(ledger.log))
    bad = (CreateA(ContractIdV(9), IOU, TextV("x"), frozenset("A"), frozenset()),)
    with pytest.raises(ValidationError):
        ledger.commit_transaction({"A"}, bad)
    assert (ledger.state, ledger.log) == before


def test_state_copy_is_independent():
    st = LedgerState()
    cid = st.allocate()
    other = st.copy()
    other.allocate()
    assert cid == ContractIdV(1) and st.next_id == 2 and other.next_id == 3
