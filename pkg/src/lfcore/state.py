"""Ledger state: the contract store and the contract-id allocator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ast import QualifiedName
from .values import ContractIdV, Value


@dataclass(frozen=True)
class ContractInfo:
    template: QualifiedName
    arg: Value
    signatories: frozenset[str]
    observers: frozenset[str]
    active: bool = True


@dataclass
class LedgerState:
    contracts: dict[ContractIdV, ContractInfo] = field(default_factory=dict)
    next_id: int = 1

    def copy(self) -> LedgerState:
        return LedgerState(dict(self.contracts), self.next_id)

    def allocate(self) -> ContractIdV:
        cid = ContractIdV(self.next_id)
        self.next_id += 1
        return cid

    def archive(self, cid: ContractIdV) -> None:
        self.contracts[cid] = replace(self.contracts[cid], active=False)

    def active(self) -> dict[ContractIdV, ContractInfo]:
        return {c: i for c, i in self.contracts.items() if i.active}

    def status_map(self) -> dict[int, str]:
        return {c.index: "Active" if i.active else "Archived" for c, i in sorted(self.contracts.items())}
