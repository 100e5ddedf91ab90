"""Tuning-parameter selection: surrogate AIC, lambda*, grids and paths.

A path is a sequence of fits along a tau grid traversed in *descending*
order, each warm-started from the previous solution, so the estimates move
from smooth to rough.  The selected entry minimizes the surrogate AIC; ties
go to the larger tau.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np

from ..errors import InvalidArgumentError, PathFailureError
from ..models.options import BoxSpec, LambdaNorm, Norm, PenaltySpec, SolverOptions, TauMode
from ..models.results import FitResult, PathEntry, PathResult
from .binning import Histogram
from .diffops import make_diff_operator, pinv_norm
from .solver import fit

logger = logging.getLogger("htf.select")

_GRID_FACTORS = (0.01, 0.1, 1.0, 10.0, 100.0)
_TIE_RTOL = 1e-9


def aic(result: FitResult, k: int, doubled: bool = False) -> float:
    """Surrogate AIC ``l(theta) + k + 1 + #{nonzero differences}``.

    ``doubled=True`` returns the conventional ``2 * (...)`` scaling; selection
    is unaffected by it.

    Raises:
        InvalidArgumentError: The fit did not converge.
    """
    if not result.converged:
        raise InvalidArgumentError("aic needs a converged fit")
    value = result.nll + k + 1 + result.active_diffs
    return 2.0 * value if doubled else value


@lru_cache(maxsize=256)
def _cached_pinv_norm(m: int, D: int, which: str) -> float:
    return pinv_norm(make_diff_operator(m, D), which=which)


def lambda_star(n: int, D: int, k: int, norm: LambdaNorm = "one") -> float:
    """Universal-scale penalty ``n * ||pinv(Delta^(k+1))|| / D``."""
    if n < 1:
        raise InvalidArgumentError(f"lambda_star needs n >= 1, got {n}")
    return n * _cached_pinv_norm(k + 1, D, norm) / D


def _check_lstar(lstar: float) -> None:
    if not (math.isfinite(lstar) and lstar > 0.0):
        raise InvalidArgumentError(f"lstar must be a positive finite value, got {lstar}")


def default_grid(lstar: float) -> list[float]:
    """``[lstar/100, lstar/10, lstar, 10 lstar, 100 lstar]`` (ascending)."""
    _check_lstar(lstar)
    return [lstar * f for f in _GRID_FACTORS]


def dense_path_grid(lstar: float, count: int = 41) -> list[float]:
    """``count`` log-spaced values from ``100 lstar`` down to ``lstar/100``."""
    _check_lstar(lstar)
    if count < 2:
        raise InvalidArgumentError(f"count must be >= 2, got {count}")
    return [float(t) for t in lstar * np.logspace(2.0, -2.0, count)]


def fit_path(
    hist: Histogram,
    k: int,
    taus,
    box: BoxSpec | None = None,
    opts: SolverOptions | None = None,
    norm: Norm = Norm.L1,
) -> PathResult:
    """Fit every tau (descending), warm-starting each from the last converged fit.

    Unconverged entries keep ``aic=None`` and are skipped by the selection.

    Raises:
        InvalidArgumentError: Empty, non-positive or ascending ``taus``.
        PathFailureError: No fit on the path converged.
    """
    taus = [float(t) for t in taus]
    if not taus:
        raise InvalidArgumentError("tau path is empty")
    if any(not (math.isfinite(t) and t > 0.0) for t in taus):
        raise InvalidArgumentError("path taus must be positive and finite")
    if any(b > a for a, b in zip(taus, taus[1:])):
        raise InvalidArgumentError("path taus must be sorted in descending order")

    path = PathResult()
    warm = None
    best_aic = math.inf
    for i, tau in enumerate(taus):
        result = fit(hist, PenaltySpec(k=k, tau=tau, norm=norm), box=box, opts=opts, theta0=warm)
        score = None
        if result.converged:
            warm = result.theta
            score = aic(result, k)
            if path.selected is None or score < best_aic - _TIE_RTOL * max(1.0, abs(best_aic)):
                path.selected, best_aic = i, score
        path.entries.append(PathEntry(tau=tau, fit=result, aic=score))

    if path.selected is None:
        raise PathFailureError(f"none of the {len(taus)} fits on the path converged", path=path)
    logger.info(
        "path done  k=%d D=%d taus=%d selected_tau=%.6g aic=%.6f failed=%d",
        k, hist.D, len(taus), path.best.tau, best_aic,
        sum(1 for e in path.entries if e.aic is None),
    )
    return path


def select_tau(
    hist: Histogram,
    k: int,
    mode: TauMode = "grid",
    box: BoxSpec | None = None,
    opts: SolverOptions | None = None,
    lambda_norm: LambdaNorm = "one",
    count: int = 41,
    norm: Norm = Norm.L1,
) -> PathResult:
    """Run the five-point grid (``"grid"``) or the dense path (``"path"``) around lambda*."""
    lstar = lambda_star(hist.n, hist.D, k, lambda_norm)
    if mode == "grid":
        taus = sorted(default_grid(lstar), reverse=True)
    elif mode == "path":
        taus = dense_path_grid(lstar, count)
    else:
        raise InvalidArgumentError(f"unknown tau mode {mode!r}")
    logger.debug("select_tau  mode=%s k=%d n=%d D=%d lstar=%.6g", mode, k, hist.n, hist.D, lstar)
    return fit_path(hist, k, taus, box=box, opts=opts, norm=norm)
