"""Ledger data types: addresses, transactions, blocks, receipts and versioned state."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Optional

from .values import NULL, encode


class AddressKind(str, Enum):
    CONTRACT = "Contract"
    SOURCE = "Source"
    ORACLE = "Oracle"
    PROPOSER = "Proposer"


class Address(NamedTuple):
    kind: AddressKind
    id: str

    def __str__(self) -> str:
        return self.id


def contract(id: str) -> Address:
    return Address(AddressKind.CONTRACT, id)


class StateKey(NamedTuple):
    contract: Address
    key: str

    def __str__(self) -> str:
        return f"{self.contract.id}:{self.key}"


class Entry(NamedTuple):
    value: Any
    version: int


@dataclass(frozen=True)
class Transaction:
    txid: str
    proposer: Address
    target: Address
    method: str
    args: tuple = ()
    proposed_at_step: int = 0
    arrival_seq: int = 0
    # txid of an earlier same-step transaction this one must observe
    depends_on: Optional[str] = None

    def __post_init__(self):
        if self.target.kind is not AddressKind.CONTRACT:
            raise ValueError(f"transaction target must be a contract, got {self.target}")

    def to_json(self) -> dict:
        d = {
            "txid": self.txid,
            "proposer": self.proposer.id,
            "target": self.target.id,
            "method": self.method,
            "args": [encode(a) for a in self.args],
            "proposed_at_step": self.proposed_at_step,
            "arrival_seq": self.arrival_seq,
        }
        if self.depends_on is not None:
            d["depends_on"] = self.depends_on
        return d


class TxFactory:
    """Mints sequence-derived txids and arrival numbers."""

    def __init__(self, start: int = 0):
        self._seq = start

    def make(self, proposer: Address, target: Address, method: str, args: Iterable = (),
             step: int = 0, depends_on: str | None = None) -> Transaction:
        seq = self._seq
        self._seq += 1
        return Transaction(f"tx{seq:06d}", proposer, target, method, tuple(args), step, seq, depends_on)


class BlockStatus(str, Enum):
    COMMITTED = "Committed"
    INVALIDATED = "Invalidated"


@dataclass(frozen=True)
class Block:
    height: int
    step: int
    txs: tuple
    status: BlockStatus = BlockStatus.COMMITTED
    # number of state keys this block committed
    writes: int = 0

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "step": self.step,
            "status": self.status.value,
            "writes": self.writes,
            "txs": [tx.txid for tx in self.txs],
        }


class ReceiptStatus(str, Enum):
    APPLIED = "Applied"
    FAILED_EXCEPTION = "FailedException"
    INVALIDATED_BLOCK_FAULT = "InvalidatedBlockFault"
    INVALIDATED_MVCC_CONFLICT = "InvalidatedMvccConflict"
    REJECTED_AT_ENDORSEMENT = "RejectedAtEndorsement"


@dataclass(frozen=True)
class Receipt:
    txid: str
    status: ReceiptStatus
    reason: str = ""
    step_committed: Optional[int] = None
    result: Any = None

    @property
    def applied(self) -> bool:
        return self.status is ReceiptStatus.APPLIED

    def to_json(self) -> dict:
        return {
            "txid": self.txid,
            "status": self.status.value,
            "reason": self.reason,
            "step_committed": self.step_committed,
            "result": encode(self.result),
        }


class WorldState(Mapping):
    """Versioned key-value store keyed by :class:`StateKey`.

    A key's version is 0 on its first committed write and grows by one per
    later committed write. Reads never touch versions. Values are immutable,
    so :meth:`snapshot` is a shallow copy.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[StateKey, Entry] | None = None):
        self._entries: dict[StateKey, Entry] = dict(entries) if entries else {}

    def __getitem__(self, key: StateKey) -> Entry:
        return self._entries[key]

    def __iter__(self) -> Iterator[StateKey]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key) -> bool:
        return key in self._entries

    def get(self, key, default=None):
        return self._entries.get(key, default)

    def value(self, key: StateKey, default=NULL):
        e = self._entries.get(key)
        return default if e is None else e.value

    def version(self, key: StateKey) -> Optional[int]:
        e = self._entries.get(key)
        return None if e is None else e.version

    def apply(self, writes: Mapping[StateKey, Any]) -> None:
        """Commit ``writes`` in place."""
        entries = self._entries
        for key, value in writes.items():
            old = entries.get(key)
            entries[key] = Entry(value, 0 if old is None else old.version + 1)

    def snapshot(self) -> "WorldState":
        return WorldState(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, WorldState):
            return self._entries == other._entries
        return NotImplemented

    __hash__ = None

    def __repr__(self) -> str:
        return f"WorldState({len(self._entries)} keys)"

    def to_json(self) -> dict:
        return {str(k): {"value": encode(e.value), "version": e.version}
                for k, e in sorted(self._entries.items(), key=lambda kv: str(kv[0]))}


def commit_writes(state: WorldState, writes: Mapping[StateKey, Any]) -> WorldState:
    """Return a new state with ``writes`` committed; ``state`` is left as is."""
    new = state.snapshot()
    new.apply(writes)
    return new


def snapshot(state: WorldState) -> WorldState:
    return state.snapshot()


@dataclass
class ReadWriteSet:
    """Keys read (with the version seen, ``None`` when absent) and values written."""

    reads: dict = field(default_factory=dict)
    writes: dict = field(default_factory=dict)

    def is_stale(self, state: WorldState) -> list:
        """Keys whose committed version no longer matches the version read."""
        return [k for k, v in self.reads.items() if state.version(k) != v]

    def to_json(self) -> dict:
        return {
            "reads": {str(k): v for k, v in sorted(self.reads.items(), key=lambda kv: str(kv[0]))},
            "writes": {str(k): encode(v) for k, v in sorted(self.writes.items(), key=lambda kv: str(kv[0]))},
        }


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def dump_ledger(chain: Iterable[Block], state: WorldState, receipts: Iterable[Receipt],
                transactions: Iterable[Transaction] | None = None) -> str:
    """Canonical JSON for chain, committed state and receipts (golden-file form).

    ``transactions`` defaults to those included in blocks.
    """
    chain = list(chain)
    if transactions is None:
        transactions = [tx for block in chain for tx in block.txs]
    txs = [tx.to_json() for tx in transactions]
    return canonical_json({
        "chain": [b.to_json() for b in chain],
        "transactions": txs,
        "state": state.to_json(),
        "receipts": [r.to_json() for r in sorted(receipts, key=lambda r: r.txid)],
    })
