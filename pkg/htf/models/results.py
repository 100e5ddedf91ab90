"""Result records for fits and tuning paths.

Plain dataclasses like the runtime state records: built by the services,
never mutated afterwards, with ``to_dict()`` for reports and logs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .options import PenaltySpec


@dataclass(eq=False)
class FitResult:
    """Estimated log-intensity plus solver diagnostics."""

    theta: np.ndarray
    objective: float
    nll: float
    kkt_residual: float
    active_diffs: int
    iterations: int
    converged: bool
    penalty: PenaltySpec
    polished: bool = False
    rho: float | None = None
    box_active: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.penalty.k,
            "tau": self.penalty.tau,
            "norm": self.penalty.norm.value,
            "objective": self.objective,
            "nll": self.nll,
            "kkt_residual": self.kkt_residual,
            "active_diffs": self.active_diffs,
            "iterations": self.iterations,
            "converged": self.converged,
            "polished": self.polished,
            "rho": self.rho,
            "box_active": self.box_active,
        }


@dataclass(eq=False)
class PathEntry:
    """One tau on a tuning path; ``aic`` is ``None`` for unconverged fits."""

    tau: float
    fit: FitResult
    aic: float | None


@dataclass(eq=False)
class PathResult:
    """Fits along a descending tau grid and the AIC-selected entry."""

    entries: list[PathEntry] = field(default_factory=list)
    selected: int | None = None

    @property
    def taus(self) -> list[float]:
        return [e.tau for e in self.entries]

    @property
    def best(self) -> PathEntry:
        if self.selected is None:
            raise LookupError("path has no selected entry")
        return self.entries[self.selected]

    def to_dict(self) -> dict[str, Any]:
        return {
            "selected": self.selected,
            "entries": [
                {"tau": e.tau, "aic": e.aic, **e.fit.to_dict()} for e in self.entries
            ],
        }
