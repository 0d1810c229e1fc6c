"""Shared test helpers."""

from __future__ import annotations

from lfcore.parser import parse_expr, parse_scenario
from lfcore.scenario import run_scenario


def expr(text: str, package: str | None = None, module: str | None = None):
    return parse_expr(text, package, module)


def run(world, script: str):
    report, ledger = run_scenario(world, parse_scenario(script))
    failed = [s for s in report.steps if not s.ok]
    assert not failed, failed
    return report, ledger


def cash(currency: str, amount: str) -> str:
    return f'(record Iou:Cash (currency "{currency}") (amount {amount}))'


def simple_iou(issuer: str, owner: str, amount: str = "100.0") -> str:
    return f"(record Iou:SimpleIou (issuer '{issuer}) (owner '{owner}) (cash {cash('USD', amount)}))"


def iou(issuer: str, owner: str, currency: str = "USD", amount: str = "100.0") -> str:
    return f"(record Iou:Iou (issuer '{issuer}) (owner '{owner}) (cash {cash(currency, amount)}))"
