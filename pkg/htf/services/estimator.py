"""End-to-end histogram trend filtering.

Sample in, normalized evaluable density out:

1. bin the sample (``default_num_bins`` unless the config fixes ``bins``),
2. fit the penalized Poisson log-intensity (explicit tau, or the AIC
   selection on the grid/path around lambda*),
3. map bin log-intensities to densities, ``f(xi_j) = exp(theta_j) / (n delta)``,
   and renormalize so the Riemann mass ``sum(delta * f)`` is exactly one.
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError
from scipy.special import logsumexp

from ..errors import ConvergenceError, EstimateValidationError, SchemaError
from ..models.estimate import SCHEMA_VERSION, DensityEstimate, EstimateDiagnostics
from ..models.options import HtfConfig
from ..models.results import FitResult
from .binning import Histogram, Sample, default_num_bins, make_histogram
from .model_select import aic, select_tau
from .solver import fit

logger = logging.getLogger("htf.estimator")


def recover_density(
    hist: Histogram,
    theta,
    k: int,
    diagnostics: dict[str, Any] | None = None,
) -> DensityEstimate:
    """Push bin log-intensities through ``exp(theta) / (n delta)`` and renormalize.

    ``diagnostics`` supplies the ``EstimateDiagnostics`` fields other than
    ``D`` and ``mass_before_renormalization``; defaults describe an explicit
    fit with zero residual.
    """
    theta = np.asarray(theta, dtype=float)
    n, delta = hist.n, hist.delta
    # Riemann mass of exp(theta) / (n delta) is sum(exp(theta)) / n.
    log_mass = float(logsumexp(theta)) - math.log(n)
    values = np.exp(theta - math.log(n * delta) - log_mass)

    fields: dict[str, Any] = {"tau": 0.0, "kkt_residual": 0.0, "converged": True}
    fields.update(diagnostics or {})
    fields.update(D=hist.D, mass_before_renormalization=math.exp(log_mass))
    return DensityEstimate(
        version=SCHEMA_VERSION,
        support=hist.support,
        delta=delta,
        k=k,
        centers=hist.centers.tolist(),
        values=values.tolist(),
        diagnostics=EstimateDiagnostics(**fields),
    )


def _diagnostics(
    result: FitResult, tau: float, score: float | None, selection: str, failed: int = 0
) -> dict[str, Any]:
    return {
        "tau": tau,
        "aic": score,
        "kkt_residual": result.kkt_residual,
        "converged": result.converged,
        "active_diffs": result.active_diffs,
        "box_active": result.box_active,
        "norm": result.penalty.norm,
        "selection": selection,
        "failed_fits": failed,
    }


def fit_density(sample: Sample, cfg: HtfConfig | None = None) -> DensityEstimate:
    """Fit a histogram trend filtering density to ``sample``.

    Raises:
        ConvergenceError: An explicit tau did not converge (the unconverged
            ``FitResult`` is attached).
        PathFailureError: No fit on the selection path converged.
        InvalidArgumentError, DimensionError, DegenerateSupportError:
            Propagated from binning and the solver.
    """
    cfg = cfg or HtfConfig()
    D = default_num_bins(sample.n) if cfg.bins == "auto" else int(cfg.bins)
    hist = make_histogram(sample, D)

    if isinstance(cfg.tau, str):
        path = select_tau(
            hist,
            cfg.k,
            cfg.tau,
            box=cfg.box,
            opts=cfg.solver,
            lambda_norm=cfg.lambda_norm,
            count=cfg.path_count,
            norm=cfg.norm,
        )
        entry = path.best
        result, tau, score, selection = entry.fit, entry.tau, entry.aic, cfg.tau
        failed = sum(e.aic is None for e in path.entries)
    else:
        tau = float(cfg.tau)
        result = fit(hist, cfg.penalty(tau), box=cfg.box, opts=cfg.solver)
        if not result.converged:
            raise ConvergenceError(
                f"fit with tau={tau:g} stopped after {result.iterations} iterations "
                f"with KKT residual {result.kkt_residual:.3e}",
                fit=result,
            )
        score, selection = aic(result, cfg.k), "explicit"
        failed = 0

    est = recover_density(hist, result.theta, cfg.k, _diagnostics(result, tau, score, selection, failed))
    logger.info(
        "density fitted  n=%d D=%d k=%d tau=%.6g selection=%s failed=%d mass=%.8f box_active=%d",
        hist.n, hist.D, cfg.k, tau, selection, failed,
        est.diagnostics.mass_before_renormalization, result.box_active,
    )
    return est


def evaluate(est: DensityEstimate, x):
    """Evaluate the estimate at ``x`` (scalar or array).

    Zero outside the support.  ``k = 0`` is piecewise constant on the bins;
    ``k >= 1`` interpolates the log-values linearly between neighbouring
    centers and holds the end values beyond the outer centers.
    """
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)

    a, b = est.support
    values = np.asarray(est.values, dtype=float)
    out = np.zeros(xs.shape)
    inside = (xs >= a) & (xs <= b)
    pts = xs[inside]

    if est.k == 0:
        idx = np.floor((pts - a) / est.delta).astype(np.int64)
        np.clip(idx, 0, values.size - 1, out=idx)
        out[inside] = values[idx]
    else:
        centers = np.asarray(est.centers, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = np.log(values)
            out[inside] = np.nan_to_num(np.exp(np.interp(pts, centers, logv)), nan=0.0)

    return float(out[0]) if scalar else out


# ---- Persistence ----


def serialize(est: DensityEstimate) -> str:
    return json.dumps(est.model_dump(mode="json"), indent=2, ensure_ascii=False)


def deserialize(document: str | bytes | dict[str, Any]) -> DensityEstimate:
    """Parse and validate a serialized estimate.

    Raises:
        SchemaError: Not a JSON object, or ``version`` missing/unsupported.
        EstimateValidationError: A field violates its invariant.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"estimate is not valid JSON: {exc}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise SchemaError("estimate document must be a JSON object")
    if "version" not in data:
        raise SchemaError("estimate document has no 'version' field")
    if data["version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported estimate version {data['version']!r} (expected {SCHEMA_VERSION})")

    try:
        return DensityEstimate.model_validate(data)
    except ValidationError as exc:
        raise EstimateValidationError(f"invalid estimate document: {exc}") from exc


def save_estimate(est: DensityEstimate, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize(est), encoding="utf-8")
    logger.debug("estimate saved  path=%s D=%d", path, est.D)
    return path


def load_estimate(path: Path | str) -> DensityEstimate:
    return deserialize(Path(path).read_text(encoding="utf-8"))
