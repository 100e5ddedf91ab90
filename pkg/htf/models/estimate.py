"""Serializable density estimate document.

``DensityEstimate`` is the versioned JSON document produced by
``fit_density`` and consumed by ``evaluate``:
``{version, support, delta, k, centers[], values[], diagnostics{}}``.
"""
from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .options import Norm

SCHEMA_VERSION = 1

Selection = Literal["explicit", "grid", "path"]


class EstimateDiagnostics(BaseModel):
    """How the estimate was obtained."""

    model_config = ConfigDict(frozen=True)

    tau: float = Field(..., ge=0.0)
    D: int = Field(..., ge=2)
    aic: float | None = None
    kkt_residual: float = Field(..., ge=0.0)
    converged: bool
    active_diffs: int = Field(0, ge=0)
    mass_before_renormalization: float = Field(1.0, gt=0.0)
    box_active: int = Field(0, ge=0)
    norm: Norm = Norm.L1
    selection: Selection = "explicit"
    failed_fits: int = Field(0, ge=0, description="Unconverged fits on the selection path")


class DensityEstimate(BaseModel):
    """Bin-center density values over ``support`` with equal spacing ``delta``."""

    model_config = ConfigDict(frozen=True)

    version: int
    support: tuple[float, float]
    delta: float = Field(..., gt=0.0)
    k: int = Field(..., ge=0)
    centers: list[float]
    values: list[float]
    diagnostics: EstimateDiagnostics

    @field_validator("support")
    @classmethod
    def _ordered_support(cls, value: tuple[float, float]) -> tuple[float, float]:
        a, b = value
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError(f"support must be finite with a < b, got [{a}, {b}]")
        return value

    @field_validator("values")
    @classmethod
    def _nonnegative_values(cls, value: list[float]) -> list[float]:
        if any(not (math.isfinite(v) and v >= 0.0) for v in value):
            raise ValueError("density values must be finite and >= 0")
        return value

    @model_validator(mode="after")
    def _consistent_grid(self) -> DensityEstimate:
        D = len(self.centers)
        if D < 2 or len(self.values) != D:
            raise ValueError("centers and values must have the same length >= 2")
        if any(b <= a for a, b in zip(self.centers, self.centers[1:])):
            raise ValueError("centers must be strictly increasing")
        if self.diagnostics.D != D:
            raise ValueError(f"diagnostics.D={self.diagnostics.D} does not match {D} centers")
        return self

    @property
    def D(self) -> int:
        return len(self.centers)
