"""Histogram trend filtering density estimation."""
from __future__ import annotations

from .models.estimate import DensityEstimate
from .models.options import BoxSpec, HtfConfig, Norm, PenaltySpec, SolverOptions
from .services.binning import make_histogram, make_sample
from .services.estimator import evaluate, fit_density

__version__ = "0.1.0"

__all__ = [
    "BoxSpec",
    "DensityEstimate",
    "HtfConfig",
    "Norm",
    "PenaltySpec",
    "SolverOptions",
    "evaluate",
    "fit_density",
    "make_histogram",
    "make_sample",
]
