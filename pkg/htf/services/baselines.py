"""Gaussian kernel density estimation baselines.

Two bandwidth rules: the normal reference (Silverman) rule and K-fold
likelihood cross-validation over a log-spaced grid.  Held-out scores use
scikit-learn's ``KernelDensity``; ``kde_evaluate`` is a plain O(n) sum per
point.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.stats import norm
from sklearn.model_selection import KFold
from sklearn.neighbors import KernelDensity

from ..errors import DegenerateSampleError, InvalidArgumentError
from .binning import Sample

logger = logging.getLogger("htf.kde")

KdeMethod = Literal["ref", "cv"]

_CV_GRID_POINTS = 30
_EVAL_CHUNK = 256


@dataclass(frozen=True, eq=False)
class KdeEstimate:
    """Gaussian KDE over a sorted copy of the sample."""

    sample: np.ndarray
    bandwidth: float
    method: KdeMethod = "ref"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0.0):
            raise InvalidArgumentError(f"bandwidth must be > 0, got {self.bandwidth}")


def _values(sample) -> np.ndarray:
    arr = sample.values if isinstance(sample, Sample) else np.asarray(sample, dtype=float).ravel()
    if arr.size < 2:
        raise InvalidArgumentError(f"KDE needs n >= 2 observations, got {arr.size}")
    return np.sort(arr)


def reference_bandwidth(sample) -> float:
    """``0.9 * min(sd, IQR / 1.34) * n**(-1/5)``; falls back to sd when the IQR is zero.

    Raises:
        DegenerateSampleError: All observations are identical.
    """
    y = _values(sample)
    sd = float(np.std(y, ddof=1))
    if not sd > 0.0:
        raise DegenerateSampleError("sample has zero spread; no reference bandwidth")
    q1, q3 = np.percentile(y, [25.0, 75.0])
    iqr = float(q3 - q1)
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    return 0.9 * spread * y.size ** (-0.2)


def default_cv_grid(h_ref: float, points: int = _CV_GRID_POINTS) -> list[float]:
    """Log-spaced grid over ``[h_ref / 10, 10 h_ref]``."""
    return [float(h) for h in h_ref * np.logspace(-1.0, 1.0, points)]


def cv_log_likelihood(sample, bandwidth: float, folds: int = 5, seed: int = 0) -> float:
    """Mean held-out log-likelihood per observation under K-fold CV.

    Folds are drawn from the sorted sample with a seeded shuffle, so the
    value does not depend on the input order.
    """
    y = _values(sample)
    if folds < 2 or folds > y.size:
        raise InvalidArgumentError(f"need 2 <= folds <= n, got folds={folds} n={y.size}")
    total = 0.0
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    for train, test in splitter.split(y):
        kde = KernelDensity(kernel="gaussian", bandwidth=bandwidth).fit(y[train, None])
        total += float(kde.score(y[test, None]))
    return total / y.size


def cv_bandwidth(sample, folds: int = 5, grid=None, seed: int = 0) -> float:
    """Bandwidth maximizing the held-out log-likelihood on ``grid``.

    The default grid has 30 log-spaced points over ``[h_ref/10, 10 h_ref]``.
    Ties go to the first grid point.

    Raises:
        InvalidArgumentError: ``folds`` outside ``[2, n]`` or a non-positive grid value.
        DegenerateSampleError: Every bandwidth gives a non-finite held-out score.
    """
    y = _values(sample)
    grid = default_cv_grid(reference_bandwidth(y)) if grid is None else [float(h) for h in grid]
    if not grid or any(not (math.isfinite(h) and h > 0.0) for h in grid):
        raise InvalidArgumentError("bandwidth grid must be non-empty and positive")

    best_h, best_score = None, -math.inf
    for h in grid:
        score = cv_log_likelihood(y, h, folds=folds, seed=seed)
        if math.isfinite(score) and score > best_score:
            best_h, best_score = h, score
    if best_h is None:
        raise DegenerateSampleError("no bandwidth gives a finite held-out log-likelihood")
    logger.debug("cv bandwidth  n=%d folds=%d grid=%d h=%.6g score=%.6f", y.size, folds, len(grid), best_h, best_score)
    return best_h


def kde_evaluate(est: KdeEstimate, x):
    """``(1 / (n h)) * sum(phi((x - y_i) / h))`` at scalar or array ``x``."""
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    shape = xs.shape
    xs = xs.ravel()
    y, h = est.sample, est.bandwidth
    out = np.empty(xs.shape)
    for start in range(0, xs.size, _EVAL_CHUNK):
        chunk = xs[start:start + _EVAL_CHUNK]
        out[start:start + chunk.size] = norm.pdf((chunk[:, None] - y[None, :]) / h).sum(axis=1)
    out /= y.size * h
    return float(out[0]) if scalar else out.reshape(shape)


def fit_kde(sample, method: KdeMethod = "ref", folds: int = 5, seed: int = 0) -> KdeEstimate:
    y = _values(sample)
    if method == "ref":
        h = reference_bandwidth(y)
    elif method == "cv":
        h = cv_bandwidth(y, folds=folds, seed=seed)
    else:
        raise InvalidArgumentError(f"unknown KDE method {method!r}")
    y.setflags(write=False)
    return KdeEstimate(sample=y, bandwidth=h, method=method)
