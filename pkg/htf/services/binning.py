"""Equal-width binning of one-dimensional samples.

Produces the histogram counts that feed the surrogate Poisson model.
Bins are half-open ``[e_j, e_{j+1})`` with the last bin closed, so a value
on an interior edge lands in the right-hand bin and the support maximum
lands in the last bin.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateSupportError, InvalidArgumentError

logger = logging.getLogger("htf.binning")


@dataclass(frozen=True, eq=False)
class Sample:
    """Observations ``y_i`` with a closed support ``[a, b]``.

    The support defaults to ``[min(values), max(values)]``.
    """

    values: np.ndarray
    support: tuple[float, float]

    @property
    def n(self) -> int:
        return int(self.values.size)

    def shifted(self, c: float) -> Sample:
        """Return the sample translated by ``c`` (support included)."""
        a, b = self.support
        return Sample(values=self.values + c, support=(a + c, b + c))


def make_sample(values, support: tuple[float, float] | None = None) -> Sample:
    """Validate observations and build a ``Sample``.

    Raises:
        InvalidArgumentError: Fewer than two values, non-finite values, or
            values outside an explicit support.
    """
    arr = np.array(values, dtype=float).ravel()
    if arr.size < 2:
        raise InvalidArgumentError(f"sample needs n >= 2 observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("sample contains non-finite values")

    if support is None:
        a, b = float(arr.min()), float(arr.max())
    else:
        a, b = float(support[0]), float(support[1])
        if not (math.isfinite(a) and math.isfinite(b)) or a > b:
            raise InvalidArgumentError(f"invalid support [{a}, {b}]")
        if arr.min() < a or arr.max() > b:
            raise InvalidArgumentError(f"sample has values outside the support [{a}, {b}]")

    arr.setflags(write=False)
    return Sample(values=arr, support=(a, b))


@dataclass(frozen=True, eq=False)
class Histogram:
    """Equal-width histogram: ``D + 1`` edges, ``D`` integer counts."""

    edges: np.ndarray
    counts: np.ndarray
    delta: float
    n: int = field(init=False)

    def __post_init__(self) -> None:
        edges = np.array(self.edges, dtype=float)
        counts = np.array(self.counts)
        if edges.ndim != 1 or counts.ndim != 1 or edges.size != counts.size + 1:
            raise InvalidArgumentError("histogram needs D + 1 edges for D counts")
        if counts.size < 2:
            raise InvalidArgumentError("histogram needs at least 2 bins")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise InvalidArgumentError("counts must be nonnegative integers")
        _check_edges(edges, self.delta)

        counts = counts.astype(np.int64)
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "n", int(counts.sum()))

    @property
    def D(self) -> int:
        return int(self.counts.size)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def support(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    @classmethod
    def from_counts(cls, counts, support: tuple[float, float] = (0.0, 1.0)) -> Histogram:
        """Build a histogram directly from counts over an equal-width grid."""
        counts = np.asarray(counts)
        a, b = float(support[0]), float(support[1])
        if not b > a:
            raise DegenerateSupportError(f"degenerate support [{a}, {b}]")
        D = int(counts.size)
        return cls(edges=np.linspace(a, b, D + 1), counts=counts, delta=(b - a) / D)


def _check_edges(edges: np.ndarray, delta: float) -> None:
    gaps = np.diff(edges)
    if not np.all(gaps > 0):
        raise InvalidArgumentError("edges must be strictly increasing")
    scale = max(delta, float(np.max(np.abs(edges))))
    if np.max(np.abs(gaps - delta)) > 1e-12 * scale * 4:
        raise InvalidArgumentError("edges must be equally spaced with width delta")


def default_num_bins(n: int) -> int:
    """Default bin count ``ceil(10 * n**0.4)``, clamped to at most ``n``."""
    if n < 2:
        raise InvalidArgumentError(f"default_num_bins needs n >= 2, got {n}")
    return min(math.ceil(10.0 * n ** 0.4), n)


def make_histogram(sample: Sample, D: int) -> Histogram:
    """Bin ``sample`` into ``D`` equal-width intervals over its support.

    Raises:
        InvalidArgumentError: ``D < 2`` or an invalid sample.
        DegenerateSupportError: The support has zero width.
    """
    if D < 2:
        raise InvalidArgumentError(f"bins must be >= 2, got {D}")
    if sample.n < 2:
        raise InvalidArgumentError(f"sample needs n >= 2 observations, got {sample.n}")
    a, b = sample.support
    if not b > a:
        raise DegenerateSupportError(f"degenerate support [{a}, {b}]")
    if D > sample.n:
        logger.warning("bins clamped  requested=%d  n=%d", D, sample.n)
        D = sample.n

    edges = np.linspace(a, b, D + 1)
    idx = np.searchsorted(edges, sample.values, side="right") - 1
    np.clip(idx, 0, D - 1, out=idx)
    counts = np.bincount(idx, minlength=D)
    hist = Histogram(edges=edges, counts=counts, delta=(b - a) / D)
    logger.debug("histogram built  n=%d  D=%d  delta=%.6g", hist.n, D, hist.delta)
    return hist
