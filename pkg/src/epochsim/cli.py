"""Command-line entry point.

Exit codes: 0 completed (a failed saving validation is still a result),
2 I/O or configuration error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .datasets import generate_dataset, inject, parse_fault, read_csv, write_files
from .exceptions import ConfigError, DatasetError, InvariantViolation
from .matrix import matrix_csv, matrix_table, run_matrix
from .scenarios import CONFIG_KEYS, Scenario, ScenarioConfig, build_config, load_config_file
from .simulation import run_simulation
from .values import fmt

EXIT_OK = 0
EXIT_IO = 2
EXIT_INVARIANT = 3

SEED_ENV = "EPOCHSIM_SEED"

log = logging.getLogger("epochsim")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "1")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _out_dir(path: str) -> Path:
    out = Path(path)
    if not out.is_dir():
        raise ConfigError(f"output directory {out} does not exist")
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def cmd_generate(args) -> int:
    out = _out_dir(args.out)
    seed = default_seed() if args.seed is None else args.seed
    written = write_files(out, generate_dataset(seed).files(seed))
    for path in written:
        print(path)
    return EXIT_OK


def cmd_inject(args) -> int:
    spec = parse_fault(args.fault)
    rows = inject(read_csv(args.input), spec)
    target = Path(args.output)
    write_files(target.parent if str(target.parent) else Path("."), {target.name: rows})
    print(f"{args.input} -> {target} ({spec.label}, {len(rows)} rows)")
    return EXIT_OK


def _run_config(args) -> ScenarioConfig:
    values = load_config_file(args.config) if args.config else {}
    cfg = build_config(values, ScenarioConfig(dataset_seed=default_seed()))
    overrides = {}
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.arch:
        overrides["arch"] = args.arch
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    return build_config(overrides, cfg) if overrides else cfg


def cmd_run(args) -> int:
    cfg = _run_config(args)
    out = _out_dir(args.out)
    report = run_simulation(cfg)
    (out / "report.json").write_text(report.dumps())
    if args.ledger:
        (out / "ledger.json").write_text(report.ledger_json())

    s = report.monthly_saving
    print(f"scenario {cfg.scenario.value}  architecture {cfg.architecture.kind.value}  dataset seed {cfg.dataset_seed}")
    print(f"monthly saving S = {'n/a' if s is None else fmt(s)} kWh  validated: {report.validated}")
    if report.deviation is not None and cfg.scenario is not Scenario.S1:
        print(f"deviation from baseline: {fmt(report.deviation)} kWh")
    print(f"blocks {len(report.chain)}  invalidated {len(report.invalidated_blocks)}")
    for status, n in report.status_counts().items():
        print(f"  {status:<24} {n:>6}")
    return EXIT_OK


def cmd_matrix(args) -> int:
    out = _out_dir(args.out)
    base = build_config(load_config_file(args.config)) if args.config else None
    rows = run_matrix(args.seeds, jobs=args.jobs, base=base)
    (out / "matrix.csv").write_text(matrix_csv(rows))
    print(matrix_table(rows))
    held = sum(r.holds for r in rows)
    print(f"{held}/{len(rows)} relational patterns hold")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epochsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write the synthetic datasets for a seed")
    g.add_argument("--seed", type=int, default=None, help=f"dataset seed (default ${SEED_ENV} or 1)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("inject", help="apply a fault to a dataset file")
    i.add_argument("--fault", required=True, help="e.g. single-null:day=2,hour=2 or delay:days=3+11,hours=2")
    i.add_argument("--in", dest="input", required=True)
    i.add_argument("--out", dest="output", required=True)
    i.set_defaults(func=cmd_inject)

    keys = "\n".join(f"  {k:<22} {v}" for k, v in CONFIG_KEYS.items())
    r = sub.add_parser("run", help="simulate one scenario", epilog="config file keys:\n" + keys,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("--scenario", choices=[s.value for s in Scenario])
    r.add_argument("--arch", choices=["oe", "eov"])
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--config", help="flat key = value file")
    r.add_argument("--out", default=".", help="directory for report.json")
    r.add_argument("--ledger", action="store_true", help="also write ledger.json")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("matrix", help="all scenarios x architectures x seeds")
    m.add_argument("--seeds", type=_seed_list, default=[1, 2, 3, 4])
    m.add_argument("--out", default=".")
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--config", help="flat key = value file applied to every run")
    m.set_defaults(func=cmd_matrix)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DatasetError, OSError) as exc:
        print(f"epochsim: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"epochsim: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"epochsim: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
