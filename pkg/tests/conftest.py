from functools import lru_cache

import pytest

from epochsim.scenarios import Scenario, ScenarioConfig, architecture
from epochsim.simulation import simulate

SEEDS = (1, 2, 3, 4)


@lru_cache(maxsize=None)
def month(scenario: str, arch: str, seed: int = 1):
    """One full simulated month, shared across tests (reports are never mutated)."""
    cfg = ScenarioConfig(scenario=Scenario(scenario), architecture=architecture(arch), dataset_seed=seed)
    return simulate(cfg)


@pytest.fixture
def run_month():
    return month


# -- acceptance summary -----------------------------------------------------------

_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    n, name = marker.args
    ok = report.passed
    prev = _outcomes.get(n)
    _outcomes[n] = (name, ok if prev is None else prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        name, ok = _outcomes[n]
        terminalreporter.write_line(f"criterion {n} {name}: {'PASS' if ok else 'FAIL'}")
