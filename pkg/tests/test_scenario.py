import pytest
from conftest import CORPUS

from lfcore.errors import ParseError
from lfcore.parser import parse_scenario
from lfcore.scenario import run_scenario

SETUP = """
(submit (Bank) (create Iou:SimpleIou (record Iou:SimpleIou (issuer 'Bank) (owner 'Alice)
  (cash (record Iou:Cash (currency "USD") (amount 5.0))))) a)
(submit (Alice) (exercise a SimpleTransfer 'Bob) b)
"""


def outcome(world, script):
    report, _ = run_scenario(world, parse_scenario(SETUP + script))
    return report


def test_project_sketch_must_match(world):
    ok = outcome(world, "(project Bob (Create b Iou:SimpleIou))")
    assert ok.exit_code == 0
    bad = outcome(world, "(project Bob (Exercise a Iou:SimpleIou SimpleTransfer (Create b Iou:SimpleIou)))")
    assert bad.exit_code == 2 and bad.steps[-1].kind == "project"
    assert "Create #2" in bad.steps[-1].tree


def test_project_wildcard_cid(world):
    assert outcome(world, "(project Alice (Exercise _ Iou:SimpleIou SimpleTransfer (Create _ Iou:SimpleIou)))").exit_code == 0


def test_assertions(world):
    assert outcome(world, "(assert-archived a) (assert-active b Iou:SimpleIou)").exit_code == 0
    assert outcome(world, "(assert-active a Iou:SimpleIou)").exit_code == 2
    assert outcome(world, "(assert-active b Iou:Iou)").exit_code == 2
    assert outcome(world, "(assert-archived b)").exit_code == 2


def test_must_fail_with_wrong_class(world):
    r = outcome(world, "(submit-must-fail (Carol) (exercise b SimpleTransfer 'Carol) ContractArchived)")
    assert r.exit_code == 2 and "expected ContractArchived, got AuthorizationError" in r.steps[-1].detail


def test_must_fail_that_succeeds_commits(world):
    report, ledger = run_scenario(world, parse_scenario(
        SETUP + "(submit-must-fail (Bob) (exercise b SimpleTransfer 'Carol) AuthorizationError)"))
    assert report.exit_code == 2 and "committed" in report.steps[-1].detail
    assert len(ledger.log) == 3


def test_stops_at_first_failure(world):
    r = outcome(world, "(assert-active a Iou:SimpleIou) (assert-active b Iou:SimpleIou)")
    assert len(r.steps) == 3


def test_result_binding_types(world):
    # b is bound at ContractId SimpleIou, so it can be exercised again
    assert outcome(world, "(submit (Bob) (exercise b SimpleTransfer 'Carol) c) (assert-active c Iou:SimpleIou)").exit_code == 0


def test_scenario_parse_errors():
    with pytest.raises(ParseError):
        parse_scenario("(submit () (create Iou:SimpleIou unit))")
    with pytest.raises(ParseError):
        parse_scenario("(frobnicate)")


def test_project_before_any_commit(world):
    report, _ = run_scenario(world, parse_scenario("(project Alice)"))
    assert report.exit_code == 2


def test_workflow_corpus(world):
    report, ledger = run_scenario(world, parse_scenario((CORPUS / "workflow.lfs").read_text()))
    assert report.exit_code == 0, [s for s in report.steps if not s.ok]
    assert ledger.replay() == ledger.state
