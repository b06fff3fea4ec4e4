"""Command line entry point.

::

    sptsim entropy --seed 7 --shots 8192 --runs 10 --out results/
    sptsim teleport --config sweep.yaml --format csv
    sptsim classify-noise --noise noise.yaml
"""
from __future__ import annotations

import argparse
import os
import sys

from .core import SimulationError
from .harness.config import ConfigError, ExperimentConfig, load_config
from .harness.experiments import run_experiment
from .harness.report import COLUMNS, emit_report
from .symmetry import SymmetryError

OUT_ENV = "SPTSIM_OUT"
COMMANDS = ("entropy", "resolved", "teleport", "classify-noise", "oracle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sptsim", description="SPT diagnostics on simulated circuits")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--seed", type=int)
        p.add_argument("--shots", type=int)
        p.add_argument("--runs", type=int)
        p.add_argument("--noise", help="noise YAML file, or 'none'")
        p.add_argument("--L", type=int, dest="L")
        p.add_argument("--boundary", choices=("open", "periodic"))
        p.add_argument("--state", choices=("cluster", "trivial"))
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--workers", type=int, help="worker threads (default: one per core)")
        p.add_argument("-q", "--quiet", action="store_true", help="do not print the result table")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg.experiment = args.command
    for key in ("seed", "shots", "runs", "L", "boundary", "state"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.noise is not None:
        cfg.noise = None if args.noise.lower() == "none" else args.noise
    return cfg.validate()


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def print_table(report, stream=sys.stdout) -> None:
    cols = list(COLUMNS[report.experiment])
    cells = [cols] + [[_fmt(r.get(c)) for c in cols] for r in report.rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    for row in cells:
        print("  ".join(c.rjust(w) for c, w in zip(row, widths)), file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run_experiment(cfg, args.workers)
    except (ConfigError, SimulationError, SymmetryError, OSError) as exc:
        print(f"sptsim: error: {exc}", file=sys.stderr)
        return 2
    out = args.out or os.environ.get(OUT_ENV, "results")
    path = emit_report(report, out, args.format)
    if not args.quiet:
        print_table(report)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
