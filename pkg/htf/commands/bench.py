"""``htf bench``: run the Monte Carlo benchmark from a JSON config."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..services.simbench import format_tsv, load_bench_config, run_benchmark, write_report


def register(subparsers) -> None:
    p = subparsers.add_parser("bench", help="run the simulation benchmark")
    p.add_argument("--config", required=True, type=Path, help="BenchConfig JSON")
    p.add_argument("--out-dir", required=True, type=Path, help="directory for report.json and report.tsv")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default from settings)")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = load_bench_config(args.config)
    workers = args.workers or args.settings.workers
    report = run_benchmark(cfg, workers=workers)
    write_report(report, args.out_dir)
    sys.stdout.write(format_tsv(report))
    return 0
