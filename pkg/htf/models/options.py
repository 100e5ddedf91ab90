"""Pydantic option models for penalties, box constraints and solvers."""
from __future__ import annotations

import math
from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Norm(str, Enum):
    """Penalty norms supported by the solver."""

    L1 = "l1"
    L2SQ = "l2sq"


class PenaltySpec(BaseModel):
    """Penalty ``tau * ||Delta^(k+1) theta||`` with the chosen norm.

    ``tau`` is the coefficient actually multiplying the penalty.  Callers
    wanting the halved constant of the box-constrained formulation pass
    ``tau / 2``.
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(1, ge=0, description="Polynomial degree; difference order is k+1")
    tau: float = Field(..., ge=0.0)
    norm: Norm = Norm.L1

    @property
    def order(self) -> int:
        return self.k + 1


class BoxSpec(BaseModel):
    """Optional box ``|theta_j - center| <= n**b`` around the uniform level.

    The center is ``log(n / D)``, the log-intensity of the uniform density,
    which equals ``log(n * delta)`` on the unit interval.
    """

    model_config = ConfigDict(frozen=True)

    enabled: bool = False
    b: float = Field(0.25, gt=0.0, lt=0.5)

    @staticmethod
    def center(n: int, D: int) -> float:
        return math.log(n / D)

    def bounds(self, n: int, D: int) -> tuple[float, float]:
        """Return ``(lo, hi)``; infinite when the box is disabled."""
        if not self.enabled:
            return -math.inf, math.inf
        c = self.center(n, D)
        half = float(n) ** self.b
        return c - half, c + half


class SolverOptions(BaseModel):
    """Stopping rules and ADMM knobs.

    ``tol`` is applied to the KKT residual after scaling by the mean bin
    count ``max(1, n / D)``.
    """

    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-6, gt=0.0)
    max_iters: int = Field(5000, ge=1)
    admm_rho: float | None = Field(None, gt=0.0, description="Defaults to max(tau, 1)")
    newton_inner_tol: float = Field(1e-10, gt=0.0)
    newton_max_iters: int = Field(50, ge=1)
    active_tol: float = Field(1e-6, gt=0.0)
    rho_balance_every: int = Field(10, ge=1)
    rho_balance_ratio: float = Field(10.0, gt=1.0)
    rho_factor: float = Field(2.0, gt=1.0)
    polish: bool = True
    polish_every: int = Field(10, ge=1)

    def scaled_tol(self, n: int, D: int) -> float:
        return self.tol * max(1.0, n / D)


TauMode = Literal["grid", "path"]
LambdaNorm = Literal["one", "inf", "max"]


class HtfConfig(BaseModel):
    """End-to-end configuration of histogram trend filtering.

    Defaults: ``k = 1``, bins from ``10 n^(1/2.5)``, tau picked by surrogate
    AIC on the five-point grid around ``lambda*``, and the box constraint
    enabled with ``b = 0.25``.
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(1, ge=0)
    bins: int | Literal["auto"] = "auto"
    tau: float | TauMode = "grid"
    norm: Norm = Norm.L1
    box: BoxSpec = BoxSpec(enabled=True)
    solver: SolverOptions = SolverOptions()
    lambda_norm: LambdaNorm = "one"
    path_count: int = Field(41, ge=2)

    @field_validator("bins")
    @classmethod
    def _enough_bins(cls, value: int | str) -> int | str:
        if isinstance(value, int) and value < 2:
            raise ValueError("bins must be >= 2")
        return value

    @field_validator("tau")
    @classmethod
    def _nonnegative_tau(cls, value: float | str) -> float | str:
        if not isinstance(value, str) and (value < 0.0 or not math.isfinite(value)):
            raise ValueError("tau must be a finite value >= 0")
        return value

    def penalty(self, tau: float) -> PenaltySpec:
        return PenaltySpec(k=self.k, tau=tau, norm=self.norm)
