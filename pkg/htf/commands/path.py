"""``htf path``: fit a tau path and report the AIC of every entry."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..models.options import BoxSpec, Norm
from ..services.binning import default_num_bins, make_histogram, make_sample
from ..services.model_select import default_grid, dense_path_grid, fit_path, lambda_star
from ._io import add_model_args, read_numbers

logger = logging.getLogger("htf.cli")


def register(subparsers) -> None:
    p = subparsers.add_parser("path", help="fit a solution path over a tau grid")
    add_model_args(p)
    p.add_argument("--grid", choices=("default", "dense"), default="default",
                   help="five-point grid or dense log-spaced path around lambda*")
    p.add_argument("--count", type=int, default=41, help="dense path length")
    p.add_argument("--lambda-norm", choices=("one", "inf", "max"), default="one")
    p.add_argument("--output", type=Path, default=None, help="path JSON")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    sample = make_sample(read_numbers(args.input), args.support)
    D = default_num_bins(sample.n) if args.bins == "auto" else args.bins
    hist = make_histogram(sample, D)
    lstar = lambda_star(hist.n, hist.D, args.k, args.lambda_norm)
    if args.grid == "default":
        taus = sorted(default_grid(lstar), reverse=True)
    else:
        taus = dense_path_grid(lstar, args.count)

    box = BoxSpec(enabled=not args.no_box, b=args.box_b)
    path = fit_path(hist, args.k, taus, box=box, norm=Norm(args.norm))

    out = sys.stdout
    out.write("tau\taic\tactive_diffs\tconverged\tselected\n")
    for i, entry in enumerate(path.entries):
        aic = "nan" if entry.aic is None else f"{entry.aic:.17g}"
        out.write(
            f"{entry.tau:.17g}\t{aic}\t{entry.fit.active_diffs}\t"
            f"{str(entry.fit.converged).lower()}\t{'*' if i == path.selected else ''}\n"
        )

    if args.output is not None:
        doc = {"lambda_star": lstar, "n": hist.n, "D": hist.D, "k": args.k, **path.to_dict()}
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(json.dumps(doc, indent=2, ensure_ascii=False), encoding="utf-8")
    logger.info(
        "path command done  input=%s n=%d D=%d taus=%d selected=%s seed=%d",
        args.input, hist.n, hist.D, len(path.entries), path.selected, args.seed,
    )
    return 0
