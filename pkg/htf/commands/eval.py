"""``htf eval``: evaluate a saved estimate at points read from a file."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..services.estimator import evaluate, load_estimate
from ._io import read_numbers, write_xy_csv


def register(subparsers) -> None:
    p = subparsers.add_parser("eval", help="evaluate a saved estimate")
    p.add_argument("--estimate", required=True, type=Path, help="estimate JSON written by 'fit'")
    p.add_argument("--points", required=True, type=Path, help="one evaluation point per line")
    p.add_argument("--output", type=Path, default=None, help="CSV x,fhat (default: stdout)")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    est = load_estimate(args.estimate)
    xs = read_numbers(args.points)
    text = write_xy_csv(args.output, xs, evaluate(est, xs))
    if args.output is None:
        sys.stdout.write(text)
    return 0
