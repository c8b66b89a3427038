"""Order-Execute and Execute-Order-Validate block pipelines.

Both pipelines share one deterministic block proposer. Per step they drain the
mempool, put the transactions in canonical order and produce at most one block.

Order-Execute executes the ordered block sequentially; one contract fault
invalidates the whole block. Execute-Order-Validate endorses every transaction
by simulating it on snapshots of the state committed at block start, then
validates read versions in block order and drops stale or failed transactions
from the block body.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from .exceptions import ContractException, InvariantViolation
from .ledger import (
    Address,
    AddressKind,
    Block,
    BlockStatus,
    ReadWriteSet,
    Receipt,
    ReceiptStatus,
    Transaction,
    WorldState,
)
from .runtime import ContractRegistry, execute


class ArchitectureKind(str, Enum):
    ORDER_EXECUTE = "oe"
    EXECUTE_ORDER_VALIDATE = "eov"


@dataclass(frozen=True)
class ArchitectureConfig:
    kind: ArchitectureKind = ArchitectureKind.ORDER_EXECUTE
    oe_skip_preexecution: bool = True
    eov_endorser_count: int = 2
    block_frequency_steps: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ArchitectureKind(self.kind))
        if self.eov_endorser_count < 1:
            raise ValueError("eov_endorser_count must be >= 1")
        if self.block_frequency_steps < 1:
            raise ValueError("block_frequency_steps must be >= 1")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "oe_skip_preexecution": self.oe_skip_preexecution,
            "eov_endorser_count": self.eov_endorser_count,
            "block_frequency_steps": self.block_frequency_steps,
        }


class Mempool:
    """FIFO of admitted transactions."""

    def __init__(self):
        self._pending: list[Transaction] = []
        self._last_seq: Optional[int] = None

    def admit(self, tx: Transaction) -> None:
        if self._last_seq is not None and tx.arrival_seq <= self._last_seq:
            raise InvariantViolation(f"arrival_seq {tx.arrival_seq} not after {self._last_seq}")
        self._last_seq = tx.arrival_seq
        self._pending.append(tx)

    def drain(self, step: int) -> list[Transaction]:
        """Remove and return, in admission order, every transaction proposed at or before ``step``."""
        due = [tx for tx in self._pending if tx.proposed_at_step <= step]
        if due:
            self._pending = [tx for tx in self._pending if tx.proposed_at_step > step]
        return due

    @property
    def pending(self) -> list[Transaction]:
        return list(self._pending)

    def __len__(self) -> int:
        return len(self._pending)


METER_ID = "u3"


def default_priority(proposer: Address) -> int:
    """Time Oracle first, then weather stakeholders, then the Client Meter."""
    if proposer.kind is AddressKind.ORACLE:
        return 0
    if proposer.kind is AddressKind.SOURCE and proposer.id == METER_ID:
        return 2
    return 1


def canonical_order(txs: Iterable[Transaction],
                    priority: Callable[[Address], int] = default_priority) -> list[Transaction]:
    return sorted(txs, key=lambda tx: (priority(tx.proposer), tx.arrival_seq))


@dataclass(frozen=True)
class Endorsement:
    tx: Transaction
    rwset: ReadWriteSet
    endorser_count: int
    result: object = None


class StepResult(NamedTuple):
    block: Optional[Block]
    receipts: list
    state: WorldState


def _block_fault_receipts(txs: Sequence[Transaction], faulty: Transaction, exc: ContractException,
                          height: int) -> list[Receipt]:
    out = []
    for tx in txs:
        if tx is faulty:
            reason = exc.reason
        else:
            reason = f"block {height} invalidated by {faulty.txid} ({exc.kind.value})"
        out.append(Receipt(tx.txid, ReceiptStatus.INVALIDATED_BLOCK_FAULT, reason))
    return out


def oe_step(mempool: Mempool, chain: Sequence[Block], state: WorldState, registry: ContractRegistry,
            step: int, config: ArchitectureConfig = ArchitectureConfig()) -> StepResult:
    txs = canonical_order(mempool.drain(step))
    if not txs:
        return StepResult(None, [], state)
    height = len(chain)
    receipts: list[Receipt] = []

    if not config.oe_skip_preexecution:
        # proposer pre-executes and leaves failing transactions out of the block
        scratch = state.snapshot()
        included = []
        for tx in txs:
            try:
                ex = execute(registry, scratch, tx)
            except ContractException as exc:
                receipts.append(Receipt(tx.txid, ReceiptStatus.FAILED_EXCEPTION, exc.reason))
                continue
            scratch.apply(ex.rwset.writes)
            included.append(tx)
        txs = included

    working = state.snapshot()
    results = []
    written = set()
    for tx in txs:
        try:
            ex = execute(registry, working, tx)
        except ContractException as exc:
            block = Block(height, step, tuple(txs), BlockStatus.INVALIDATED, 0)
            receipts.extend(_block_fault_receipts(txs, tx, exc, height))
            return StepResult(block, receipts, state)
        working.apply(ex.rwset.writes)
        written.update(ex.rwset.writes)
        results.append((tx, ex))

    block = Block(height, step, tuple(txs), BlockStatus.COMMITTED, len(written))
    receipts.extend(Receipt(tx.txid, ReceiptStatus.APPLIED, step_committed=step, result=ex.result)
                    for tx, ex in results)
    return StepResult(block, receipts, working)


def eov_endorse(tx: Transaction, state: WorldState, registry: ContractRegistry, n_endorsers: int,
                snapshots: Sequence[WorldState] | None = None):
    """Simulate ``tx`` on ``n_endorsers`` independent snapshots.

    Returns an :class:`Endorsement`, or a ``RejectedAtEndorsement`` receipt
    when the simulation faults.
    """
    if snapshots is None:
        snapshots = [state.snapshot() for _ in range(n_endorsers)]
    outcomes = []
    for snap in snapshots:
        try:
            outcomes.append(execute(registry, snap, tx))
        except ContractException as exc:
            return Receipt(tx.txid, ReceiptStatus.REJECTED_AT_ENDORSEMENT, exc.reason)
    first = outcomes[0]
    for other in outcomes[1:]:
        if other.rwset != first.rwset or other.result != first.result:
            raise InvariantViolation(f"endorsers disagree on {tx.txid}")
    return Endorsement(tx, first.rwset, len(outcomes), first.result)


def eov_step(mempool: Mempool, chain: Sequence[Block], state: WorldState, registry: ContractRegistry,
             step: int, config: ArchitectureConfig = ArchitectureConfig(kind="eov")) -> StepResult:
    txs = canonical_order(mempool.drain(step))
    if not txs:
        return StepResult(None, [], state)
    height = len(chain)
    n = config.eov_endorser_count
    in_block = {tx.txid for tx in txs}

    snapshots = [state.snapshot() for _ in range(n)]
    endorsed = {}
    for tx in txs:
        # a transaction chained to an earlier one in this block is simulated
        # only once that one has been validated
        if tx.depends_on in in_block:
            continue
        endorsed[tx.txid] = eov_endorse(tx, state, registry, n, snapshots)

    working = state.snapshot()
    receipts: list[Receipt] = []
    applied = []
    written = set()
    for tx in txs:
        e = endorsed.get(tx.txid)
        if e is None:
            e = eov_endorse(tx, working, registry, n)
        if isinstance(e, Receipt):
            receipts.append(e)
            continue
        stale = e.rwset.is_stale(working)
        if stale:
            receipts.append(Receipt(tx.txid, ReceiptStatus.INVALIDATED_MVCC_CONFLICT,
                                    f"stale read of {min(str(k) for k in stale)}"))
            continue
        working.apply(e.rwset.writes)
        written.update(e.rwset.writes)
        applied.append(tx)
        receipts.append(Receipt(tx.txid, ReceiptStatus.APPLIED, step_committed=step, result=e.result))

    block = Block(height, step, tuple(applied), BlockStatus.COMMITTED, len(written))
    return StepResult(block, receipts, working)


def run_step(config: ArchitectureConfig, mempool: Mempool, chain: Sequence[Block], state: WorldState,
             registry: ContractRegistry, step: int) -> StepResult:
    if config.kind is ArchitectureKind.ORDER_EXECUTE:
        return oe_step(mempool, chain, state, registry, step, config)
    return eov_step(mempool, chain, state, registry, step, config)
