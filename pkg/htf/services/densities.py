"""Synthetic benchmark densities.

Each truth is a finite mixture of frozen ``scipy.stats`` distributions,
truncated to a compact support and renormalized there.  Sampling draws a
component by its truncated mass, then inverts that component's CDF on the
support, so every draw lies inside the support.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class TrueDensity:
    """Truncated mixture ``sum(w_c f_c) / Z`` on ``support``."""

    id: str
    support: tuple[float, float]
    weights: tuple[float, ...]
    components: tuple  # frozen scipy.stats distributions

    def _masses(self) -> np.ndarray:
        a, b = self.support
        w = np.asarray(self.weights, dtype=float)
        return w * np.array([c.cdf(b) - c.cdf(a) for c in self.components])

    @property
    def normalizer(self) -> float:
        return float(self._masses().sum())

    def pdf(self, x):
        xs = np.asarray(x, dtype=float)
        a, b = self.support
        total = sum(w * c.pdf(xs) for w, c in zip(self.weights, self.components))
        out = np.where((xs >= a) & (xs <= b), total / self.normalizer, 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        a, b = self.support
        clipped = np.clip(xs, a, b)
        total = sum(w * (c.cdf(clipped) - c.cdf(a)) for w, c in zip(self.weights, self.components))
        out = total / self.normalizer
        return float(out) if np.ndim(out) == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise InvalidArgumentError(f"sample size must be >= 1, got {n}")
        a, b = self.support
        masses = self._masses()
        which = rng.choice(len(self.components), size=n, p=masses / masses.sum())
        u = rng.random(n)
        out = np.empty(n)
        for i, comp in enumerate(self.components):
            sel = which == i
            if not sel.any():
                continue
            lo, hi = comp.cdf(a), comp.cdf(b)
            out[sel] = comp.ppf(lo + u[sel] * (hi - lo))
        return np.clip(out, a, b)


def density_f1() -> TrueDensity:
    """Normal mixture with a narrow spike at -2; weights (0.9, 0.1, 0.1) rescaled by 1/1.1."""
    return TrueDensity(
        id="f1",
        support=(-5.0, 6.0),
        weights=(0.9 / 1.1, 0.1 / 1.1, 0.1 / 1.1),
        components=(stats.norm(0.0, 1.0), stats.norm(-2.0, 0.1), stats.norm(3.0, 0.5)),
    )


def density_f2() -> TrueDensity:
    """Five rate-2 exponentials shifted to -1, 0, 1, 2, 3 with weights (1, 2, 1, 2, 1)/7."""
    shifts = (-1.0, 0.0, 1.0, 2.0, 3.0)
    return TrueDensity(
        id="f2",
        support=(-1.0, max(shifts) + 10.0),
        weights=tuple(w / 7.0 for w in (1.0, 2.0, 1.0, 2.0, 1.0)),
        components=tuple(stats.expon(loc=m, scale=0.5) for m in shifts),
    )


def density_f3() -> TrueDensity:
    """Beta/uniform mixture on [0, 1] with a very sharp Beta(4000, 4000) bump at 0.7."""
    return TrueDensity(
        id="f3",
        support=(0.0, 1.0),
        weights=(3 / 5, 1 / 10, 1 / 40, 11 / 40),
        components=(
            stats.beta(4.0, 4.0, loc=0.0, scale=0.6),
            stats.beta(4000.0, 4000.0, loc=0.4, scale=0.6),
            stats.uniform(loc=0.0, scale=1.0),
            stats.uniform(loc=0.8, scale=0.2),
        ),
    )


def uniform_density(a: float = 0.0, b: float = 1.0) -> TrueDensity:
    if not b > a:
        raise InvalidArgumentError(f"uniform density needs a < b, got [{a}, {b}]")
    return TrueDensity(
        id="uniform",
        support=(float(a), float(b)),
        weights=(1.0,),
        components=(stats.uniform(loc=a, scale=b - a),),
    )


DENSITIES = {
    "f1": density_f1,
    "f2": density_f2,
    "f3": density_f3,
    "uniform": uniform_density,
}


def get_density(name: str) -> TrueDensity:
    try:
        return DENSITIES[name]()
    except KeyError:
        raise InvalidArgumentError(f"unknown density {name!r}; choose from {', '.join(DENSITIES)}") from None
