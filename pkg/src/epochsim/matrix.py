"""All scenarios x both architectures x several datasets, with the expected relations."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Optional, Sequence

from .scenarios import Scenario, ScenarioConfig, architecture
from .simulation import simulate
from .values import fmt

ARCHS = ("oe", "eov")


def _monthly_saving(job: tuple) -> Optional[Decimal]:
    seed, scenario, arch, base = job
    cfg = ScenarioConfig(scenario=Scenario(scenario), architecture=architecture(arch), dataset_seed=seed)
    if base is not None:
        cfg = ScenarioConfig.from_dict({**base, "scenario": scenario,
                                        "architecture": {**base["architecture"], "kind": arch},
                                        "dataset_seed": seed})
    return simulate(cfg).monthly_saving


@dataclass(frozen=True)
class MatrixRow:
    dataset: int
    scenario: Scenario
    oe: Optional[Decimal]
    eov: Optional[Decimal]
    baseline_oe: Optional[Decimal]
    baseline_eov: Optional[Decimal]

    @property
    def pattern(self) -> str:
        return PATTERNS[self.scenario]

    @property
    def holds(self) -> bool:
        oe, eov, b_oe, b_eov = self.oe, self.eov, self.baseline_oe, self.baseline_eov
        if None in (oe, eov, b_oe, b_eov):
            return False
        s = self.scenario
        if s is Scenario.S1:
            return oe == eov
        if s is Scenario.S2A:
            return oe != eov and oe != b_oe and eov != b_eov and abs(oe - b_oe) > abs(eov - b_eov)
        if s is Scenario.S2B:
            return oe != eov and oe != b_oe and eov != b_eov
        if s is Scenario.S3:
            return eov == b_eov and oe != b_oe
        return oe == eov and oe != b_oe


PATTERNS = {
    Scenario.S1: "OE==EOV",
    Scenario.S2A: "OE!=EOV; both!=S1; |OE-S1|>|EOV-S1|",
    Scenario.S2B: "OE!=EOV; both!=S1",
    Scenario.S3: "EOV==S1; OE!=S1",
    Scenario.S4: "OE==EOV; OE!=S1",
}


def run_matrix(seeds: Sequence[int], jobs: int = 1, base: ScenarioConfig | None = None) -> list[MatrixRow]:
    """Run every (seed, scenario, architecture); rows come back in sorted order."""
    base_dict = base.to_dict() if base is not None else None
    keys = [(seed, s.value, arch, base_dict) for seed in seeds for s in Scenario for arch in ARCHS]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_monthly_saving, keys))
    else:
        values = [_monthly_saving(k) for k in keys]
    results = {k[:3]: v for k, v in zip(keys, values)}
    rows = []
    for seed in seeds:
        b_oe = results[(seed, "s1", "oe")]
        b_eov = results[(seed, "s1", "eov")]
        for s in Scenario:
            rows.append(MatrixRow(seed, s, results[(seed, s.value, "oe")], results[(seed, s.value, "eov")],
                                  b_oe, b_eov))
    return rows


def _cell(x: Optional[Decimal]) -> str:
    return "" if x is None else fmt(x)


def matrix_csv(rows: Iterable[MatrixRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "scenario", "OE", "EOV", "pattern", "holds"])
    for r in rows:
        w.writerow([r.dataset, r.scenario.value, _cell(r.oe), _cell(r.eov), r.pattern, str(r.holds).lower()])
    return buf.getvalue()


def matrix_table(rows: Sequence[MatrixRow]) -> str:
    header = ("dataset", "scenario", "OE", "EOV", "pattern", "holds")
    body = [(str(r.dataset), r.scenario.value, _cell(r.oe), _cell(r.eov), r.pattern, "yes" if r.holds else "NO")
            for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.rjust(w) if i in (2, 3) else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))))
    return "\n".join(lines)
