"""Monte Carlo benchmark of HTF against KDE on the synthetic densities.

For every (density, n, replicate) one sample is drawn and every method is
fitted to it, so methods are compared on paired data.  Each replicate is
seeded from ``SeedSequence([seed, density, n, replicate])``; method-internal
randomness (CV folds) appends the method index.  Results are aggregated in
a fixed order, so reports are reproducible regardless of worker count.
"""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_serializer, field_validator

from ..errors import InvalidArgumentError
from ..models.estimate import DensityEstimate
from ..models.options import HtfConfig
from .baselines import KdeEstimate, fit_kde, kde_evaluate
from .binning import make_sample
from .densities import DENSITIES, TrueDensity, get_density
from .estimator import evaluate, fit_density

logger = logging.getLogger("htf.bench")

# Reporting scale per density (MSE x 100 or x 10).
SCALES = {"f1": 100.0, "f2": 100.0, "f3": 10.0, "uniform": 100.0}


# ---- Methods ----


def _fit_htf(cfg: HtfConfig):
    def run(values: np.ndarray, support: tuple[float, float], seed: int):
        return fit_density(make_sample(values, support), cfg)
    return run


def _fit_kde(method: str):
    def run(values: np.ndarray, support: tuple[float, float], seed: int):
        return fit_kde(values, method=method, seed=seed)
    return run


METHODS: dict[str, Callable[[np.ndarray, tuple[float, float], int], Any]] = {
    "htf_k1": _fit_htf(HtfConfig(k=1)),
    "htf_k2": _fit_htf(HtfConfig(k=2)),
    "htf_k1_path": _fit_htf(HtfConfig(k=1, tau="path")),
    "kde_ref": _fit_kde("ref"),
    "kde_cv": _fit_kde("cv"),
}


# ---- Config and report models ----


class BenchConfig(BaseModel):
    """What to run; read from JSON by ``load_bench_config``."""

    densities: list[str] = Field(default_factory=lambda: ["f1"])
    sizes: list[int] = Field(default_factory=lambda: [500, 1000, 2500, 5000, 10000, 50000])
    replicates: int = Field(25, ge=1)
    methods: list[str] = Field(default_factory=lambda: ["htf_k1", "kde_ref"])
    grid_size: int = Field(1000, ge=2)
    seed: int = Field(0, ge=0)

    @field_validator("densities")
    @classmethod
    def _known_densities(cls, value: list[str]) -> list[str]:
        unknown = [d for d in value if d not in DENSITIES]
        if not value or unknown:
            raise ValueError(f"densities must be a non-empty subset of {sorted(DENSITIES)}; unknown: {unknown}")
        return value

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, value: list[str]) -> list[str]:
        unknown = [m for m in value if m not in METHODS]
        if not value or unknown:
            raise ValueError(f"methods must be a non-empty subset of {sorted(METHODS)}; unknown: {unknown}")
        return value

    @field_validator("sizes")
    @classmethod
    def _valid_sizes(cls, value: list[int]) -> list[int]:
        if not value or any(n < 2 for n in value):
            raise ValueError("sizes must be non-empty and every n >= 2")
        return value


class BenchCell(BaseModel):
    """Aggregate over the replicates of one (density, n, method)."""

    density: str
    n: int
    method: str
    replicates: int
    failures: int = 0
    partial: bool = False
    scale: float
    mean_mse: float | None = None
    scaled_mse: float | None = None
    mean_kl: float | None = None
    mean_seconds: float | None = None
    mse: list[float] = Field(default_factory=list)
    errors: list[str] = Field(default_factory=list)

    @field_serializer("mean_mse", "scaled_mse", "mean_kl", "mean_seconds")
    def _finite_or_null(self, value: float | None) -> float | None:
        # JSON has no infinity; a vanishing estimate makes KL infinite.
        if value is None or not math.isfinite(value):
            return None
        return value


class BenchReport(BaseModel):
    config: BenchConfig
    cells: list[BenchCell] = Field(default_factory=list)


def load_bench_config(path: Path | str) -> BenchConfig:
    """Read a ``BenchConfig`` from JSON.

    Raises:
        InvalidArgumentError: Missing file, malformed JSON or invalid fields.
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidArgumentError(f"bench config not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return BenchConfig.model_validate(data)
    except (json.JSONDecodeError, ValidationError) as exc:
        raise InvalidArgumentError(f"invalid bench config {path}: {exc}") from exc


# ---- Metrics ----


def _as_callable(est) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(est, DensityEstimate):
        return lambda x: evaluate(est, x)
    if isinstance(est, KdeEstimate):
        return lambda x: kde_evaluate(est, x)
    if isinstance(est, TrueDensity):
        return est.pdf
    if callable(est):
        return lambda x: np.broadcast_to(np.asarray(est(x), dtype=float), np.shape(x))
    raise InvalidArgumentError(f"cannot evaluate an object of type {type(est).__name__}")


def mse(est, truth: TrueDensity, grid_size: int = 1000) -> float:
    """Mean of ``(est(x) - pdf(x))**2`` over ``grid_size`` uniform points on the support."""
    if grid_size < 2:
        raise InvalidArgumentError(f"grid_size must be >= 2, got {grid_size}")
    a, b = truth.support
    x = np.linspace(a, b, grid_size)
    diff = _as_callable(est)(x) - truth.pdf(x)
    return float(np.mean(diff * diff))


def kl_divergence(est, truth: TrueDensity, grid_size: int = 1000) -> float:
    """Riemann sum of ``f0 log(f0 / f)`` on ``grid_size`` cell midpoints; ``inf`` if ``f`` vanishes where ``f0`` does not."""
    if grid_size < 1:
        raise InvalidArgumentError(f"grid_size must be >= 1, got {grid_size}")
    a, b = truth.support
    delta = (b - a) / grid_size
    x = a + (np.arange(grid_size) + 0.5) * delta
    f0 = truth.pdf(x)
    f = _as_callable(est)(x)
    pos = f0 > 0
    if np.any(f[pos] <= 0):
        return math.inf
    return float(delta * np.sum(f0[pos] * np.log(f0[pos] / f[pos])))


# ---- Runner ----


@dataclass
class _Record:
    density: str
    n: int
    method: str
    replicate: int
    mse: float | None = None
    kl: float | None = None
    seconds: float | None = None
    error: str | None = None


def _density_index(name: str) -> int:
    return list(DENSITIES).index(name)


def _run_replicate(task: tuple[str, int, int, tuple[str, ...], int, int]) -> list[_Record]:
    name, n, rep, methods, grid_size, seed = task
    truth = get_density(name)
    key = [seed, _density_index(name), n, rep]
    values = truth.sample(n, np.random.default_rng(np.random.SeedSequence(key)))

    records = []
    for method in methods:
        rec = _Record(density=name, n=n, method=method, replicate=rep)
        method_seed = int(np.random.SeedSequence(key + [list(METHODS).index(method)]).generate_state(1)[0])
        try:
            started = time.perf_counter()
            est = METHODS[method](values, truth.support, method_seed)
            rec.seconds = time.perf_counter() - started
            rec.mse = mse(est, truth, grid_size)
            rec.kl = kl_divergence(est, truth, grid_size)
        except Exception as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            logger.warning("replicate failed  density=%s n=%d method=%s rep=%d error=%s", name, n, method, rep, rec.error)
        records.append(rec)
    return records


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def run_benchmark(cfg: BenchConfig, workers: int = 1) -> BenchReport:
    """Run every (density, n, method, replicate) of ``cfg``.

    Per-replicate failures are recorded in the cell (``failures``,
    ``errors``, ``partial``) and never abort the run.
    """
    tasks = [
        (name, n, rep, tuple(cfg.methods), cfg.grid_size, cfg.seed)
        for name in cfg.densities
        for n in cfg.sizes
        for rep in range(cfg.replicates)
    ]
    logger.info("benchmark start  tasks=%d methods=%s workers=%d", len(tasks), ",".join(cfg.methods), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_replicate, tasks))
    else:
        batches = [_run_replicate(t) for t in tasks]

    grouped: dict[tuple[str, int, str], list[_Record]] = {}
    for rec in (r for batch in batches for r in batch):
        grouped.setdefault((rec.density, rec.n, rec.method), []).append(rec)

    report = BenchReport(config=cfg)
    for name in cfg.densities:
        for n in cfg.sizes:
            for method in cfg.methods:
                recs = sorted(grouped.get((name, n, method), []), key=lambda r: r.replicate)
                ok = [r for r in recs if r.error is None]
                mean_mse = _mean([r.mse for r in ok])
                scale = SCALES.get(name, 100.0)
                cell = BenchCell(
                    density=name,
                    n=n,
                    method=method,
                    replicates=len(ok),
                    failures=len(recs) - len(ok),
                    partial=len(ok) < cfg.replicates,
                    scale=scale,
                    mean_mse=mean_mse,
                    scaled_mse=None if mean_mse is None else scale * mean_mse,
                    mean_kl=_mean([r.kl for r in ok]),
                    mean_seconds=_mean([r.seconds for r in ok]),
                    mse=[r.mse for r in ok],
                    errors=[r.error for r in recs if r.error is not None],
                )
                report.cells.append(cell)
                logger.info(
                    "cell done  density=%s n=%d method=%s reps=%d failures=%d scaled_mse=%s",
                    name, n, method, cell.replicates, cell.failures,
                    "nan" if cell.scaled_mse is None else f"{cell.scaled_mse:.4f}",
                )
    return report


# ---- Output ----

TSV_COLUMNS = ("density", "n", "method", "mean_mse", "scaled_mse", "mean_seconds", "replicates")


def _fmt(value: Any) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def format_tsv(report: BenchReport) -> str:
    """Tab-separated table with columns padded to a common width."""
    rows = [list(TSV_COLUMNS)]
    for cell in report.cells:
        rows.append([_fmt(getattr(cell, col)) for col in TSV_COLUMNS])
    widths = [max(len(r[i]) for r in rows) for i in range(len(TSV_COLUMNS))]
    lines = ["\t".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def write_report(report: BenchReport, out_dir: Path | str) -> tuple[Path, Path]:
    """Write ``report.json`` and ``report.tsv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    tsv_path = out_dir / "report.tsv"
    json_path.write_text(json.dumps(report.model_dump(), indent=2, ensure_ascii=False), encoding="utf-8")
    tsv_path.write_text(format_tsv(report), encoding="utf-8")
    logger.info("report written  json=%s tsv=%s cells=%d", json_path, tsv_path, len(report.cells))
    return json_path, tsv_path
