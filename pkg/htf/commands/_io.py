"""File parsing and writing shared by the subcommands."""
from __future__ import annotations

import argparse
import math
from pathlib import Path

import numpy as np

from ..errors import InvalidArgumentError


def read_numbers(path: Path | str) -> np.ndarray:
    """Read one number per line; blank lines are skipped.

    Raises:
        InvalidArgumentError: A line is not a finite number (the message names
            the 1-based line number).
    """
    path = Path(path)
    values: list[float] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise InvalidArgumentError(f"{path}: line {lineno}: not a number: {text!r}") from None
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{path}: line {lineno}: not a finite number: {text!r}")
            values.append(value)
    return np.array(values, dtype=float)


def write_xy_csv(path: Path | str | None, xs, ys, header: tuple[str, str] = ("x", "fhat")) -> str:
    """Render ``x,y`` rows with 17 significant digits; written to ``path`` if given."""
    lines = [",".join(header)]
    lines.extend(f"{x:.17g},{y:.17g}" for x, y in zip(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)))
    text = "\n".join(lines) + "\n"
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return text


# ---- argparse value types ----


def bins_arg(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bins must be an integer or 'auto', got {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError("bins must be >= 2")
    return value


def tau_arg(text: str) -> float | str:
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tau must be a number or 'auto', got {text!r}") from None
    if not (math.isfinite(value) and value >= 0.0):
        raise argparse.ArgumentTypeError("tau must be a finite value >= 0")
    return value


def support_arg(text: str) -> tuple[float, float]:
    parts = text.split(",")
    try:
        a, b = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"support must look like A,B, got {text!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise argparse.ArgumentTypeError(f"support needs finite A < B, got {text!r}")
    return a, b


def int_list_arg(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def nonnegative_int_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {value}")
    return value


def add_model_args(parser: argparse.ArgumentParser) -> None:
    """Flags shared by ``fit`` and ``path``."""
    parser.add_argument("--input", required=True, type=Path, help="one observation per line")
    parser.add_argument("--k", type=nonnegative_int_arg, default=1, help="polynomial degree (default 1)")
    parser.add_argument("--bins", type=bins_arg, default="auto", help="bin count or 'auto'")
    parser.add_argument("--support", type=support_arg, default=None, help="support A,B (default: sample range)")
    parser.add_argument("--seed", type=int, default=0, help="logged only; fitting draws no random numbers")
    parser.add_argument("--norm", choices=("l1", "l2sq"), default="l1", help="penalty norm")
    parser.add_argument("--no-box", action="store_true", help="disable the box constraint")
    parser.add_argument("--box-b", type=float, default=0.25, help="box half-width exponent in (0, 0.5)")
