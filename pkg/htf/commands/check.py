"""``htf check``: tabulate ``||pinv(Delta^(k+1))|| / D`` against (.1474, .1482).

The default is the induced infinity norm.  With ``--norm max`` (largest
entry) and ``k = 1`` every ratio lands in the interval.
"""
from __future__ import annotations

import argparse
import sys

from ..errors import InvalidArgumentError
from ..services.diffops import make_diff_operator, pinv_norm
from ._io import int_list_arg, nonnegative_int_arg

INTERVAL = (0.1474, 0.1482)
DEFAULT_DIMS = (500, 1000, 2000, 5000, 10000)


def register(subparsers) -> None:
    p = subparsers.add_parser("check", help="pseudo-inverse norm ratio check")
    p.add_argument("--k", type=nonnegative_int_arg, default=1)
    p.add_argument("--dmin", type=int, default=None)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--step", type=int, default=100)
    p.add_argument("--d", type=int_list_arg, default=None, help="explicit comma-separated D values")
    p.add_argument("--norm", choices=("inf", "one", "max"), default="inf")
    p.set_defaults(handler=run)


def dims(args: argparse.Namespace) -> list[int]:
    if args.d is not None:
        if args.dmin is not None or args.dmax is not None:
            raise InvalidArgumentError("--d cannot be combined with --dmin/--dmax")
        values = list(args.d)
    elif args.dmin is None and args.dmax is None:
        values = list(DEFAULT_DIMS)
    else:
        dmin = args.dmin if args.dmin is not None else args.dmax
        dmax = args.dmax if args.dmax is not None else args.dmin
        if dmin > dmax:
            raise InvalidArgumentError(f"--dmin {dmin} exceeds --dmax {dmax}")
        if args.step < 1:
            raise InvalidArgumentError(f"--step must be >= 1, got {args.step}")
        values = list(range(dmin, dmax + 1, args.step))
    if not values:
        raise InvalidArgumentError("no D values to check")
    return values


def run(args: argparse.Namespace) -> int:
    lo, hi = INTERVAL
    out = sys.stdout
    out.write("D\tnorm\tratio\tverdict\n")
    all_inside = True
    for D in dims(args):
        value = pinv_norm(make_diff_operator(args.k + 1, D), which=args.norm)
        ratio = value / D
        inside = lo < ratio < hi
        all_inside = all_inside and inside
        out.write(f"{D}\t{value:.10g}\t{ratio:.10g}\t{'inside' if inside else 'outside'}\n")
    out.write(f"all_inside={'yes' if all_inside else 'no'}  interval=({lo}, {hi})  norm={args.norm}  k={args.k}\n")
    return 0
