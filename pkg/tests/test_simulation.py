import json
from collections import Counter

import pytest

from epochsim.architectures import ArchitectureConfig
from epochsim.contracts import PredictorModel
from epochsim.datasets import Dataset, WeatherProfile, generate_dataset
from epochsim.ledger import ReceiptStatus
from epochsim.scenarios import Scenario, ScenarioConfig, architecture
from epochsim.simulation import run_simulation, simulate
from epochsim.values import ZERO

from conftest import month


def test_baseline_run_shape():
    r = month("s1", "oe", 1)
    methods = Counter(tx.method for tx in r.transactions)
    assert methods["midnightProcess"] == 30
    assert methods["monthEndProcess"] == 1
    assert methods["addHourlySample"] == 3 * 720
    assert methods["addDailySample"] == 30
    assert sorted(r.receipt_by_txid) == sorted(tx.txid for tx in r.transactions)
    first = next(tx for tx in r.transactions if tx.method == "midnightProcess")
    assert first.proposed_at_step == 48
    assert len(r.daily_savings) == 30
    assert r.monthly_saving > 0 and r.validated is True


def test_hour_samples_share_a_block():
    r = month("s1", "eov", 1)
    block = next(b for b in r.chain if b.step == 29)
    assert [tx.proposer.id for tx in block.txs] == ["u0", "u1", "u2"]
    assert [b.height for b in r.chain] == list(range(len(r.chain)))


def test_every_proposal_lands_in_its_step_block():
    r = month("s4", "oe", 1)
    step_of = {tx.txid: b.step for b in r.chain for tx in b.txs}
    assert all(step_of[tx.txid] == tx.proposed_at_step for tx in r.transactions)


def test_monthly_sum_is_exact_fold():
    r = month("s2b", "eov", 2)
    total = ZERO
    for z in r.daily_savings:
        total += z
    assert total == r.monthly_saving


def test_empty_datasets_give_zero_saving():
    cfg = ScenarioConfig()
    r = simulate(cfg, Dataset({u: [] for u in ("u0", "u1", "u2")}, []))
    assert all(tx.proposer.kind.value == "Oracle" for b in r.chain for tx in b.txs)
    assert r.daily_savings == [ZERO] * 30
    assert r.monthly_saving == ZERO and r.validated is True


def test_zero_noise_zero_saving_dataset_gives_zero_month():
    # sources equal to the truth, so the voted temperatures are the ones the meter followed
    ds = generate_dataset(1, WeatherProfile(source_spread=0.0), noise=0.0, saving=(0.0, 0.0))
    assert simulate(ScenarioConfig(), ds).monthly_saving == ZERO


def test_invalid_block_has_no_effect_on_state_counts():
    r = month("s2a", "oe", 1)
    assert len(r.invalidated_blocks) == 1
    assert r.status_counts()[ReceiptStatus.INVALIDATED_BLOCK_FAULT.value] == 3


def test_report_json_contents():
    r = run_simulation(ScenarioConfig(Scenario.S2A, architecture("eov"), dataset_seed=1))
    data = json.loads(r.dumps())
    assert data["baseline_monthly_saving"] == str(month("s1", "eov", 1).monthly_saving)
    assert data["deviation_from_baseline"] == str(r.monthly_saving - r.baseline)
    assert len(data["daily_savings"]) == 30 and data["daily_savings"][0]["day"] == 2
    assert len(data["ledger_sha256"]) == 64


@pytest.mark.parametrize("scenario", ["s1", "s3"])
def test_embedded_config_reruns_identically(scenario):
    cfg = ScenarioConfig(Scenario(scenario), architecture("oe"), dataset_seed=3,
                         model=PredictorModel("55", "9.5", "17"))
    text = run_simulation(cfg).dumps()
    again = ScenarioConfig.from_dict(json.loads(text)["config"])
    assert again == cfg
    assert run_simulation(again).dumps() == text


def test_block_frequency_groups_steps():
    cfg = ScenarioConfig(architecture=ArchitectureConfig(block_frequency_steps=24))
    r = simulate(cfg)
    assert all(b.step % 24 == 0 for b in r.chain)
    assert len(r.receipts) == len(r.transactions)


def test_preexecuted_oe_drops_only_faulty_samples():
    cfg = ScenarioConfig(Scenario.S2A, ArchitectureConfig(oe_skip_preexecution=False), dataset_seed=1)
    r = simulate(cfg)
    assert r.status_counts()["FailedException"] == 1
    assert not r.invalidated_blocks
    assert r.monthly_saving == month("s2a", "eov", 1).monthly_saving


def test_explicit_dataset_paths(tmp_path):
    from epochsim.datasets import write_files
    ds = generate_dataset(4)
    files = ds.files(4)
    write_files(tmp_path, files)
    names = {"u0": "esco", "u1": "meteo", "u2": "client", "u3": "meter"}
    paths = {u: str(tmp_path / f"{n}_seed4.csv") for u, n in names.items()}
    cfg = ScenarioConfig(dataset_paths=paths, dataset_seed=99)
    assert simulate(cfg).monthly_saving == month("s1", "oe", 4).monthly_saving
