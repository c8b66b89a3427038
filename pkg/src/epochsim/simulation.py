"""Month-long run of the contract suite under one execution architecture."""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .agents import bind_agents
from .architectures import Mempool, run_step
from .contracts import AGGREGATOR, daily_savings, deploy_tepc, monthly_savings
from .datasets import Dataset
from .exceptions import InvariantViolation
from .ledger import Block, BlockStatus, Receipt, ReceiptStatus, Transaction, TxFactory, WorldState, canonical_json, commit_writes, dump_ledger
from .runtime import ContractRegistry
from .scenarios import Scenario, ScenarioConfig
from .values import fmt

log = logging.getLogger(__name__)


@dataclass
class SimReport:
    config: ScenarioConfig
    chain: list
    state: WorldState
    receipts: list
    transactions: list
    baseline: Optional[Decimal] = None

    @property
    def receipt_by_txid(self) -> dict:
        return {r.txid: r for r in self.receipts}

    @property
    def daily_savings(self) -> list:
        return daily_savings(self.state, AGGREGATOR)

    @property
    def monthly_saving(self) -> Optional[Decimal]:
        sigma_m = monthly_savings(self.state, AGGREGATOR)
        return sigma_m[-1] if sigma_m else None

    @property
    def validated(self) -> Optional[bool]:
        by_id = self.receipt_by_txid
        for tx in reversed(self.transactions):
            if tx.method == "monthEndProcess":
                r = by_id[tx.txid]
                return bool(r.result) if r.applied else None
        return None

    def savings_by_day(self) -> list[tuple[int, Decimal]]:
        """Daily savings labelled with the day each applied midnight run closed."""
        by_id = self.receipt_by_txid
        hours = self.config.clock.hours_per_day
        days = [tx.proposed_at_step // hours for tx in self.transactions
                if tx.method == "midnightProcess" and by_id[tx.txid].applied]
        return list(zip(days, self.daily_savings))

    def status_counts(self) -> dict:
        counts = Counter(r.status.value for r in self.receipts)
        return {s.value: counts.get(s.value, 0) for s in ReceiptStatus}

    @property
    def invalidated_blocks(self) -> list[int]:
        return [b.height for b in self.chain if b.status is BlockStatus.INVALIDATED]

    @property
    def deviation(self) -> Optional[Decimal]:
        s = self.monthly_saving
        if self.baseline is None or s is None:
            return None
        return s - self.baseline

    def ledger_json(self) -> str:
        return dump_ledger(self.chain, self.state, self.receipts, self.transactions)

    def to_json(self) -> dict:
        s = self.monthly_saving
        dev = self.deviation
        return {
            "config": self.config.to_dict(),
            "monthly_saving": None if s is None else fmt(s),
            "validated": self.validated,
            "daily_savings": [{"day": d, "saving": fmt(z)} for d, z in self.savings_by_day()],
            "receipts": self.status_counts(),
            "transactions": len(self.transactions),
            "blocks": len(self.chain),
            "invalidated_blocks": self.invalidated_blocks,
            "baseline_monthly_saving": None if self.baseline is None else fmt(self.baseline),
            "deviation_from_baseline": None if dev is None else fmt(dev),
            "ledger_sha256": hashlib.sha256(self.ledger_json().encode()).hexdigest(),
        }

    def dumps(self) -> str:
        return canonical_json(self.to_json())


def simulate(config: ScenarioConfig, dataset: Dataset | None = None) -> SimReport:
    """Run one month. ``dataset`` defaults to ``config.dataset()``."""
    if dataset is None:
        dataset = config.dataset()
    clock = config.clock
    arch = config.architecture
    registry = ContractRegistry()
    state = WorldState()
    chain: list[Block] = []
    receipts: list[Receipt] = []
    transactions: list[Transaction] = []
    mempool = Mempool()
    factory = TxFactory()
    agents: list = []

    for step in range(clock.end_step + 1):
        if step == clock.deploy_step:
            suite = deploy_tepc(registry, step, config.model, config.voting)
            state = commit_writes(state, suite.genesis)
        if step == clock.source_init_step:
            agents = bind_agents(dataset.weather, dataset.consumption, clock)
        for agent in agents:
            for tx in agent.tick(step, factory):
                mempool.admit(tx)
                transactions.append(tx)
        if step % arch.block_frequency_steps == 0 or step == clock.end_step:
            result = run_step(arch, mempool, chain, state, registry, step)
            if result.block is not None:
                chain.append(result.block)
            receipts.extend(result.receipts)
            state = result.state

    _check_run(chain, receipts, transactions, mempool)
    log.debug("%s/%s seed %s: %d txs, %d blocks", config.scenario.value, arch.kind.value,
              config.dataset_seed, len(transactions), len(chain))
    return SimReport(config, chain, state, receipts, transactions)


def _check_run(chain, receipts, transactions, mempool) -> None:
    if len(mempool):
        raise InvariantViolation(f"{len(mempool)} transactions left in the mempool")
    if [b.height for b in chain] != list(range(len(chain))):
        raise InvariantViolation("block heights are not consecutive")
    ids = [r.txid for r in receipts]
    if len(ids) != len(set(ids)) or set(ids) != {tx.txid for tx in transactions}:
        raise InvariantViolation("receipts do not match proposed transactions one to one")


def run_simulation(config: ScenarioConfig, with_baseline: bool = True) -> SimReport:
    """Run ``config`` and, for fault scenarios, the same-dataset baseline for the deviation."""
    report = simulate(config)
    if config.scenario is Scenario.S1:
        report.baseline = report.monthly_saving
    elif with_baseline:
        report.baseline = simulate(config.with_scenario(Scenario.S1)).monthly_saving
    return report
