"""``htf fit``: fit a density to a file of observations."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..models.options import BoxSpec, HtfConfig, Norm
from ..services.binning import make_sample
from ..services.estimator import evaluate, fit_density, save_estimate, serialize
from ._io import add_model_args, read_numbers, tau_arg, write_xy_csv

logger = logging.getLogger("htf.cli")

CURVE_POINTS = 1000


def register(subparsers) -> None:
    p = subparsers.add_parser("fit", help="fit a histogram trend filtering density")
    add_model_args(p)
    tau = p.add_mutually_exclusive_group()
    tau.add_argument("--tau", type=tau_arg, default=None, help="penalty weight, or 'auto' (AIC on the grid)")
    tau.add_argument("--tau-auto", choices=("grid", "path"), default=None, help="AIC selection mode")
    p.add_argument("--output", type=Path, default=None, help="estimate JSON (default: stdout)")
    p.add_argument("--curve", type=Path, default=None, help=f"CSV x,fhat on {CURVE_POINTS} grid points")
    p.set_defaults(handler=run)


def build_config(args: argparse.Namespace) -> HtfConfig:
    if args.tau_auto is not None:
        tau = args.tau_auto
    elif args.tau is None or args.tau == "auto":
        tau = "grid"
    else:
        tau = args.tau
    box = BoxSpec(enabled=not args.no_box, b=args.box_b)
    return HtfConfig(k=args.k, bins=args.bins, tau=tau, norm=Norm(args.norm), box=box)


def run(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    sample = make_sample(read_numbers(args.input), args.support)
    est = fit_density(sample, cfg)

    if args.output is not None:
        save_estimate(est, args.output)
    else:
        sys.stdout.write(serialize(est) + "\n")

    if args.curve is not None:
        a, b = est.support
        xs = np.linspace(a, b, CURVE_POINTS)
        write_xy_csv(args.curve, xs, evaluate(est, xs))

    d = est.diagnostics
    logger.info("fit command done  input=%s n=%d D=%d tau=%.6g seed=%d", args.input, sample.n, d.D, d.tau, args.seed)
    return 0
