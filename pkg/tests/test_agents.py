from epochsim.agents import (
    MeterAgent,
    SimulationClock,
    StakeholderAgent,
    TimeOracle,
    bind_agents,
    meter_tick,
    oracle_tick,
    source_address,
    stakeholder_tick,
)
from epochsim.datasets import ConsumptionRow, WeatherRow
from epochsim.ledger import TxFactory
from epochsim.values import num

CLOCK = SimulationClock()


def wrow(day, hour, tau=10):
    return WeatherRow(day, hour, num(tau), num(1000), num(50))


def test_clock_layout():
    assert CLOCK.end_step == 744
    assert CLOCK.step_of(2, 5) == 29
    assert CLOCK.day(29) == 2 and CLOCK.hour_of_day(29) == 5


def test_stakeholder_emits_at_row_step():
    agent = StakeholderAgent(source_address("u0"), [wrow(2, 5)], CLOCK)
    f = TxFactory()
    assert stakeholder_tick(agent, 28, f) == []
    (tx,) = stakeholder_tick(agent, 29, f)
    assert tx.method == "addHourlySample" and tx.proposed_at_step == 29
    assert tx.args[0].hour == 5 and tx.args[0].source == "u0"
    assert stakeholder_tick(agent, 30, f) == []


def test_stakeholder_duplicate_rows_in_row_order():
    agent = StakeholderAgent(source_address("u0"), [wrow(2, 5, 1), wrow(2, 5, 0)], CLOCK)
    a, b = stakeholder_tick(agent, 29, TxFactory())
    assert (a.args[0].tau, b.args[0].tau) == (num(1), num(0))
    assert a.arrival_seq < b.arrival_seq


def test_nothing_before_month_begin():
    agent = StakeholderAgent(source_address("u0"), [WeatherRow(1, 20, num(1), num(1000), num(50))], CLOCK)
    assert agent.tick(20, TxFactory()) == []


def test_meter_normal_and_delayed():
    agent = MeterAgent(source_address("u3"), [ConsumptionRow(2, 23, num(100)), ConsumptionRow(4, 1, num(90))], CLOCK)
    f = TxFactory()
    (tx,) = meter_tick(agent, 47, f)
    assert tx.method == "addDailySample" and tx.args[0].day == 2
    assert meter_tick(agent, 72, f) == []
    (late,) = meter_tick(agent, 73, f)
    assert late.args[0].day == 4


def test_oracle_schedule():
    oracle = TimeOracle(CLOCK)
    f = TxFactory()
    assert oracle_tick(oracle, 47, f) == []
    assert [t.method for t in oracle_tick(oracle, 48, f)] == ["midnightProcess"]
    mid, end = oracle_tick(oracle, 744, f)
    assert (mid.method, end.method) == ("midnightProcess", "monthEndProcess")
    assert end.depends_on == mid.txid
    count = sum(len(oracle_tick(oracle, s, TxFactory())) for s in range(745))
    assert count == 31  # 30 midnights and one month end


def test_bind_agents_order():
    agents = bind_agents({"u2": [], "u0": [], "u1": []}, [], CLOCK)
    assert isinstance(agents[0], TimeOracle)
    assert [a.address.id for a in agents[1:]] == ["u0", "u1", "u2", "u3"]


def test_agent_streams_are_reproducible():
    rows = [wrow(d, h) for d in (2, 3) for h in range(24)]

    def stream():
        f = TxFactory()
        agents = bind_agents({"u0": rows, "u1": rows, "u2": rows}, [ConsumptionRow(2, 23, num(1))], CLOCK)
        return [tx for s in range(100) for a in agents for tx in a.tick(s, f)]

    assert stream() == stream()
