"""Command-line entrypoint.

Builds the parser, mounts one subcommand per module in ``commands/`` and
maps errors to exit codes: 0 success, 1 runtime or convergence failure,
2 usage or validation error.  All numerical work lives in ``services/``.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from .commands import bench, check, eval as eval_cmd, fit, path
from .config import LOG_LEVELS, load_settings
from .logging_config import configure_logging

logger = logging.getLogger("htf.main")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htf", description="Histogram trend filtering density estimation")
    parser.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper, default=None)
    parser.add_argument("--log-file", type=Path, default=None)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="{fit,eval,path,bench,check}")
    for module in (fit, eval_cmd, path, bench, check):
        module.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        args.settings = load_settings(log_level=args.log_level, log_file=args.log_file)
    except ValidationError as exc:
        print(f"htf: error: {exc.errors()[0]['msg']}", file=sys.stderr)
        return EXIT_USAGE
    configure_logging(args.settings)

    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"htf {args.command}: error: {exc.errors()[0]['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"htf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"htf {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"htf {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
