"""Simulation clock and the authorized agents that propose transactions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .contracts import DATA_QUALIFIER, METER, ORACLE
from .datasets import ConsumptionRow, WeatherRow
from .ledger import Address, AddressKind, Transaction, TxFactory
from .values import ConsumptionSample, Sample


@dataclass(frozen=True)
class SimulationClock:
    """One step is one hour; the defaults describe a 31-day month."""

    hours_per_day: int = 24
    days_per_month: int = 31
    deploy_step: int = 12
    source_init_step: int = 16
    month_begin_step: int = 24
    first_midnight_step: int = 48

    @property
    def end_step(self) -> int:
        return self.hours_per_day * self.days_per_month

    def hour_of_day(self, step: int) -> int:
        return step % self.hours_per_day

    def day(self, step: int) -> int:
        return step // self.hours_per_day + 1

    def step_of(self, day: int, hour: int) -> int:
        return (day - 1) * self.hours_per_day + hour

    def to_dict(self) -> dict:
        return {
            "hours_per_day": self.hours_per_day,
            "days_per_month": self.days_per_month,
            "deploy_step": self.deploy_step,
            "source_init_step": self.source_init_step,
            "month_begin_step": self.month_begin_step,
            "first_midnight_step": self.first_midnight_step,
        }


class SourceAgent:
    """Replays a dataset: each row is proposed at the step matching its datetime."""

    method = ""

    def __init__(self, address: Address, rows: Sequence, clock: SimulationClock,
                 target: Address = DATA_QUALIFIER):
        self.address = address
        self.rows = list(rows)
        self.clock = clock
        self.target = target
        self.cursor = 0

    def due(self, step: int) -> list:
        rows = self.rows
        step_of = self.clock.step_of
        # rows dated before this step can no longer be proposed
        while self.cursor < len(rows) and step_of(rows[self.cursor].day, rows[self.cursor].hour) < step:
            self.cursor += 1
        out = []
        while self.cursor < len(rows) and step_of(rows[self.cursor].day, rows[self.cursor].hour) == step:
            out.append(rows[self.cursor])
            self.cursor += 1
        return out

    def payload(self, row):
        raise NotImplementedError

    def tick(self, step: int, factory: TxFactory) -> list[Transaction]:
        if step < self.clock.month_begin_step:
            return []
        return [factory.make(self.address, self.target, self.method, (self.payload(row),), step)
                for row in self.due(step)]


class StakeholderAgent(SourceAgent):
    method = "addHourlySample"

    def payload(self, row: WeatherRow) -> Sample:
        return Sample(row.temperature, row.pressure, row.humidity, row.hour, row.day, self.address.id)


class MeterAgent(SourceAgent):
    method = "addDailySample"

    def payload(self, row: ConsumptionRow) -> ConsumptionSample:
        return ConsumptionSample(row.consumption_kwh, row.day, self.address.id)


class TimeOracle:
    """Triggers the midnight process every day from the first midnight and the
    month end at the last step. The month-end transaction is chained to that
    step's midnight transaction so it sees the final daily saving."""

    def __init__(self, clock: SimulationClock, address: Address = Address(AddressKind.ORACLE, ORACLE),
                 target: Address = DATA_QUALIFIER):
        self.clock = clock
        self.address = address
        self.target = target

    def tick(self, step: int, factory: TxFactory) -> list[Transaction]:
        c = self.clock
        out = []
        if step >= c.first_midnight_step and c.hour_of_day(step) == 0 and step <= c.end_step:
            out.append(factory.make(self.address, self.target, "midnightProcess", (), step))
        if step == c.end_step:
            dep = out[-1].txid if out else None
            out.append(factory.make(self.address, self.target, "monthEndProcess", (), step, depends_on=dep))
        return out


def source_address(id: str) -> Address:
    return Address(AddressKind.SOURCE, id)


def stakeholder_tick(agent: StakeholderAgent, step: int, factory: TxFactory) -> list[Transaction]:
    return agent.tick(step, factory)


def meter_tick(agent: MeterAgent, step: int, factory: TxFactory) -> list[Transaction]:
    return agent.tick(step, factory)


def oracle_tick(oracle: TimeOracle, step: int, factory: TxFactory) -> list[Transaction]:
    return oracle.tick(step, factory)


def bind_agents(weather: dict, consumption: Sequence, clock: SimulationClock) -> list:
    """Agents in the fixed per-step invocation order: oracle, u0, u1, u2, meter."""
    agents = [TimeOracle(clock)]
    for u in sorted(weather):
        agents.append(StakeholderAgent(source_address(u), weather[u], clock))
    agents.append(MeterAgent(source_address(METER), consumption, clock))
    return agents
