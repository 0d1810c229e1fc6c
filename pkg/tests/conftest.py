from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import pytest

from lfcore import check_packages, parse_package

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

_CRITERIA: OrderedDict[int, tuple[str, list[bool]]] = OrderedDict()


def load(*paths: Path):
    return check_packages([parse_package(p.read_text(), str(p)) for p in paths])


@pytest.fixture(scope="session")
def world():
    return load(CORPUS / "iou.lf", CORPUS / "swap.lf", CORPUS / "fixtures.lf",
                CORPUS / "fixpoint.lf", FIXTURES / "tree.lf", FIXTURES / "playground.lf")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, (title, []))
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry[1].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, results = _CRITERIA[number]
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{status}] {title} ({sum(results)}/{len(results)} checks)")
