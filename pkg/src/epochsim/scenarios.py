"""Scenario presets and run configuration."""

from __future__ import annotations

import configparser
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional

from .agents import SimulationClock
from .architectures import ArchitectureConfig, ArchitectureKind
from .contracts import METER, STAKEHOLDERS, PredictorModel, VotingConfig
from .datasets import Dataset, Delay, DuplicateZero, MultiNull, SingleNull, generate_dataset, inject, read_csv
from .exceptions import ConfigError

DELAYED_DAYS = (3, 11, 16, 25, 27, 30)


class Scenario(str, Enum):
    S1 = "s1"    # success baseline
    S2A = "s2a"  # one null sample from the Client
    S2B = "s2b"  # 25 to 30 null samples from the Client
    S3 = "s3"    # ESCO repeats 25 to 30 hours with an all-zero second sample
    S4 = "s4"    # Client Meter readings delayed past midnight on six days


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario = Scenario.S1
    architecture: ArchitectureConfig = field(default_factory=ArchitectureConfig)
    dataset_seed: int = 1
    # explicit CSV paths keyed by source id (u0..u3); overrides generation
    dataset_paths: Optional[dict] = None
    model: PredictorModel = field(default_factory=PredictorModel)
    voting: VotingConfig = field(default_factory=VotingConfig)
    # seeds fault placement; defaults to the dataset seed
    rng_seed: Optional[int] = None
    delay_hours: int = 2
    clock: SimulationClock = field(default_factory=SimulationClock)

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))

    @property
    def fault_seed(self) -> int:
        return self.dataset_seed if self.rng_seed is None else self.rng_seed

    def with_scenario(self, scenario) -> "ScenarioConfig":
        return replace(self, scenario=Scenario(scenario))

    def faults(self) -> dict:
        """Fault specs keyed by the source whose dataset they mutate."""
        seed = self.fault_seed
        s = self.scenario
        if s is Scenario.S2A:
            return {"u2": SingleNull(2, 2, "u2")}
        if s is Scenario.S2B:
            count = random.Random(f"{seed}/s2b").randint(25, 30)
            return {"u2": MultiNull("u2", count, seed)}
        if s is Scenario.S3:
            count = random.Random(f"{seed}/s3").randint(25, 30)
            return {"u0": DuplicateZero("u0", count, seed)}
        if s is Scenario.S4:
            return {METER: Delay(DELAYED_DAYS, self.delay_hours)}
        return {}

    def clean_dataset(self) -> Dataset:
        if self.dataset_paths:
            missing = [s for s in (*STAKEHOLDERS, METER) if s not in self.dataset_paths]
            if missing:
                raise ConfigError(f"dataset paths missing for {', '.join(missing)}")
            weather = {u: read_csv(self.dataset_paths[u]) for u in STAKEHOLDERS}
            return Dataset(weather, read_csv(self.dataset_paths[METER]))
        return generate_dataset(self.dataset_seed, model=self.model)

    def dataset(self) -> Dataset:
        ds = self.clean_dataset()
        weather = dict(ds.weather)
        consumption = ds.consumption
        for source, spec in self.faults().items():
            if source == METER:
                consumption = inject(consumption, spec)
            else:
                weather[source] = inject(weather[source], spec)
        return Dataset(weather, consumption, ds.truth)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.value,
            "architecture": self.architecture.to_dict(),
            "dataset_seed": self.dataset_seed,
            "dataset_paths": dict(sorted(self.dataset_paths.items())) if self.dataset_paths else None,
            "model": self.model.to_dict(),
            "voting": self.voting.to_dict(),
            "rng_seed": self.rng_seed,
            "delay_hours": self.delay_hours,
            "clock": self.clock.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        m = d.get("model", {})
        v = d.get("voting", {})
        return cls(
            scenario=Scenario(d.get("scenario", "s1")),
            architecture=ArchitectureConfig(**d.get("architecture", {})),
            dataset_seed=int(d.get("dataset_seed", 1)),
            dataset_paths=d.get("dataset_paths"),
            model=PredictorModel(m.get("a", "50"), m.get("b", "10"), m.get("t_base", "18")),
            voting=VotingConfig(**v) if v else VotingConfig(),
            rng_seed=d.get("rng_seed"),
            delay_hours=int(d.get("delay_hours", 2)),
            clock=SimulationClock(**d.get("clock", {})),
        )


# -- flat key-value config files ----------------------------------------------

CONFIG_KEYS = {
    "scenario": "s1..s4",
    "arch": "oe or eov",
    "seed": "dataset seed",
    "rng_seed": "fault placement seed",
    "model.a": "base load, kWh/day",
    "model.b": "kWh per heating degree-day",
    "model.t_base": "base temperature, degrees C",
    "voting.tolerance.tau": "temperature agreement tolerance",
    "voting.tolerance.psi": "pressure agreement tolerance",
    "voting.tolerance.rho": "humidity agreement tolerance",
    "voting.weight.u0": "ESCO weight",
    "voting.weight.u1": "Meteo France weight",
    "voting.weight.u2": "Client weight",
    "eov.endorsers": "endorsers per transaction",
    "oe.skip_preexecution": "true to let faulty transactions into OE blocks",
    "block_frequency": "steps between blocks",
    "delay_hours": "Client Meter delay in scenario s4",
    "dataset.u0": "ESCO weather CSV",
    "dataset.u1": "Meteo France weather CSV",
    "dataset.u2": "Client weather CSV",
    "dataset.u3": "Client Meter consumption CSV",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def parse_config_text(text: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    values = dict(parser["run"])
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return values


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)


def build_config(values: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Apply flat config ``values`` on top of ``base``."""
    cfg = base or ScenarioConfig()
    try:
        arch = cfg.architecture
        arch = ArchitectureConfig(
            kind=values.get("arch", arch.kind.value),
            oe_skip_preexecution=_bool(values["oe.skip_preexecution"], "oe.skip_preexecution")
            if "oe.skip_preexecution" in values else arch.oe_skip_preexecution,
            eov_endorser_count=int(values.get("eov.endorsers", arch.eov_endorser_count)),
            block_frequency_steps=int(values.get("block_frequency", arch.block_frequency_steps)),
        )
        model = PredictorModel(
            values.get("model.a", cfg.model.base_load),
            values.get("model.b", cfg.model.hdd_coefficient),
            values.get("model.t_base", cfg.model.base_temperature),
        )
        names = ("tau", "psi", "rho")
        voting = VotingConfig(
            tuple(values.get(f"voting.tolerance.{n}", t) for n, t in zip(names, cfg.voting.tolerances)),
            tuple(values.get(f"voting.weight.{u}", w) for u, w in zip(STAKEHOLDERS, cfg.voting.weights)),
        )
        paths = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("dataset.")}
        rng_seed = values.get("rng_seed")
        return replace(
            cfg,
            scenario=Scenario(values.get("scenario", cfg.scenario.value)),
            architecture=arch,
            dataset_seed=int(values.get("seed", cfg.dataset_seed)),
            dataset_paths=paths or cfg.dataset_paths,
            model=model,
            voting=voting,
            rng_seed=int(rng_seed) if rng_seed is not None else cfg.rng_seed,
            delay_hours=int(values.get("delay_hours", cfg.delay_hours)),
        )
    except (ValueError, ArithmeticError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def architecture(kind: str) -> ArchitectureConfig:
    return ArchitectureConfig(kind=ArchitectureKind(kind))
