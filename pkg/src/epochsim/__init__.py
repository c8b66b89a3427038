"""Deterministic simulator for an energy performance contract running on
order-execute and execute-order-validate blockchain pipelines."""

from .architectures import ArchitectureConfig, ArchitectureKind
from .scenarios import Scenario, ScenarioConfig
from .simulation import SimReport, run_simulation, simulate

__all__ = [
    "ArchitectureConfig",
    "ArchitectureKind",
    "Scenario",
    "ScenarioConfig",
    "SimReport",
    "run_simulation",
    "simulate",
]

__version__ = "0.1.0"
