"""Penalized Poisson surrogate solver.

Minimizes ``l(theta) + tau * ||Delta^(k+1) theta||`` where
``l(theta) = sum(exp(theta_j) - x_j * theta_j)`` over histogram counts ``x``:

* ``Norm.L1``: ADMM on the split ``z = Delta theta``.  The theta-update is a
  smooth Poisson problem with a banded quadratic term solved by (projected)
  Newton with banded Cholesky; the z-update is soft-thresholding; rho is
  rebalanced from the primal/dual residuals.  Every few iterations, and once
  at the end, the ADMM multipliers seed a projected Newton solve of the
  box-constrained dual ("polish"), which converges to tight tolerances and
  leaves exact stationarity with zero differences off the multiplier bounds.
* ``Norm.L2SQ``: the squared norm makes the objective smooth; solved by
  projected Newton on the banded Hessian.

An optional box ``|theta_j - log(n/D)| <= n**b`` keeps the feasible set
compact when bins are empty.  Convergence is certified by the KKT residual
``||exp(theta) - x + tau * Delta^T s||_inf`` (projected on the box), never by
iteration counts alone.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import linalg, sparse
from scipy.special import logsumexp

from ..errors import DimensionError, InvalidArgumentError, UnboundedProblemError
from ..models.options import BoxSpec, Norm, PenaltySpec, SolverOptions
from ..models.results import FitResult
from .binning import Histogram
from .diffops import DiffOperator, apply, apply_transpose, make_diff_operator

logger = logging.getLogger("htf.solver")

_BOUND_EPS = 1e-9
_MAX_STEP = 10.0
_ARMIJO = 1e-4
_POLISH_MAX_ITERS = 100
_POLISH_GRAD = 1e-2
_POLISH_BAND = 1e-3
_POLISH_RIDGE = 1e-12
_DUAL_HALF_WIDTH = 50.0


# ---- Objective pieces ----


def poisson_nll(theta, counts) -> float:
    """Surrogate Poisson loss ``sum(exp(theta) - x * theta)`` (no constants)."""
    theta = np.asarray(theta, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if theta.ndim != 1 or theta.shape != counts.shape:
        raise DimensionError(f"theta {theta.shape} and counts {counts.shape} differ")
    return float(np.sum(np.exp(theta) - counts * theta))


def penalty_value(op: DiffOperator, pen: PenaltySpec, theta) -> float:
    if pen.tau == 0.0:
        return 0.0
    d = apply(op, np.asarray(theta, dtype=float))
    if pen.norm is Norm.L1:
        return pen.tau * float(np.sum(np.abs(d)))
    return pen.tau * float(np.dot(d, d))


def objective(hist: Histogram, pen: PenaltySpec, theta) -> float:
    """``l(theta) + tau * ||Delta theta||_1`` or ``+ tau * ||Delta theta||_2^2``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (hist.D,):
        raise DimensionError(f"theta must have length {hist.D}, got shape {theta.shape}")
    nll = poisson_nll(theta, hist.counts)
    if pen.tau == 0.0:
        return nll
    return nll + penalty_value(make_diff_operator(pen.order, hist.D), pen, theta)


def l2sq_gradient(hist: Histogram, pen: PenaltySpec, theta) -> np.ndarray:
    """Gradient ``exp(theta) - x + 2 tau Delta^T Delta theta`` of the squared-l2 objective."""
    theta = np.asarray(theta, dtype=float)
    op = make_diff_operator(pen.order, hist.D)
    return np.exp(theta) - hist.counts + 2.0 * pen.tau * apply_transpose(op, apply(op, theta))


# ---- Smooth subproblem ----


class _SmoothPoisson:
    """``phi(theta) = sum(exp(theta) - x theta) + (c/2) ||Delta theta - v||^2``."""

    def __init__(self, op: DiffOperator, x: np.ndarray, c: float) -> None:
        self.op = op
        self.x = x
        self.c = c
        self.v = np.zeros(op.rows)
        self._normal_ab = op.normal_banded()
        self._normal: sparse.csr_matrix | None = None

    def value_grad(self, theta: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        e = np.exp(theta)
        r = apply(self.op, theta) - self.v
        f = float(np.sum(e - self.x * theta) + 0.5 * self.c * np.dot(r, r))
        g = e - self.x + self.c * apply_transpose(self.op, r)
        return f, g, e

    def newton_step(self, e: np.ndarray, g: np.ndarray, free: np.ndarray | None) -> np.ndarray:
        m = self.op.order
        if free is None:
            ab = self.c * self._normal_ab
            ab[m] += e
            return -_solve_banded(ab, g)

        idx = np.flatnonzero(free)
        p = np.zeros_like(g)
        if idx.size == 0:
            return p
        if self._normal is None:
            A = self.op.to_sparse()
            self._normal = (A.T @ A).tocsr()
        # Rows/columns of a banded matrix taken in sorted order stay banded.
        sub = self._normal[idx][:, idx].tocsr()
        ab = np.zeros((m + 1, idx.size))
        for s in range(min(m, idx.size - 1) + 1):
            ab[m - s, s:] = self.c * sub.diagonal(s)
        ab[m] += e[idx]
        p[idx] = -_solve_banded(ab, g[idx])
        return p


def _solve_banded(ab: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return linalg.solveh_banded(ab, b)
    except linalg.LinAlgError:
        ridged = ab.copy()
        ridged[-1] += 1e-10 * max(1.0, float(np.max(np.abs(ab[-1]))))
        return linalg.solveh_banded(ridged, b)


def _project_residual(g: np.ndarray, theta: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Smallest stationarity violation once box normal-cone terms are added."""
    r = g.copy()
    at_lo = theta <= lo + _BOUND_EPS
    at_hi = theta >= hi - _BOUND_EPS
    r[at_lo] = np.minimum(r[at_lo], 0.0)
    r[at_hi] = np.maximum(r[at_hi], 0.0)
    return r


def _minimize_smooth(
    prob: _SmoothPoisson,
    theta: np.ndarray,
    lo: float,
    hi: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, bool]:
    """Projected Newton with an Armijo search along the projection arc."""
    boxed = math.isfinite(lo) or math.isfinite(hi)
    f, g, e = prob.value_grad(theta)
    for it in range(max_iter):
        r = _project_residual(g, theta, lo, hi)
        r_norm = float(np.max(np.abs(r)))
        if r_norm <= tol:
            return theta, it, True

        free = None
        if boxed:
            binding = ((theta <= lo + _BOUND_EPS) & (g > 0)) | ((theta >= hi - _BOUND_EPS) & (g < 0))
            if binding.any():
                free = ~binding
        p = prob.newton_step(e, g, free)

        big = float(np.max(np.abs(p)))
        alpha = min(1.0, _MAX_STEP / big) if big > 0 else 1.0
        while True:
            trial = np.clip(theta + alpha * p, lo, hi)
            ft, gt, et = prob.value_grad(trial)
            if ft <= f + _ARMIJO * float(np.dot(g, trial - theta)):
                break
            # At rounding level the objective stops resolving; accept a step that shrinks the residual.
            if ft - f <= 1e-13 * abs(f) and np.max(np.abs(_project_residual(gt, trial, lo, hi))) < r_norm:
                break
            alpha *= 0.5
            if alpha < 1e-10:
                return theta, it, False

        moved = float(np.max(np.abs(trial - theta)))
        theta, f, g, e = trial, ft, gt, et
        if moved <= 1e-15 * (1.0 + float(np.max(np.abs(theta)))):
            r_norm = float(np.max(np.abs(_project_residual(g, theta, lo, hi))))
            return theta, it + 1, r_norm <= tol

    r_norm = float(np.max(np.abs(_project_residual(g, theta, lo, hi))))
    return theta, max_iter, r_norm <= tol


# ---- Certificates and small helpers ----


def _active_mask(d: np.ndarray, active_tol: float) -> np.ndarray:
    if d.size == 0:
        return np.zeros(0, dtype=bool)
    thr = active_tol * max(1.0, float(np.max(np.abs(d))))
    return np.abs(d) > thr


def _kkt_l1(
    op: DiffOperator,
    theta: np.ndarray,
    x: np.ndarray,
    tau: float,
    s_hint: np.ndarray,
    lo: float,
    hi: float,
    active_tol: float,
) -> float:
    d = apply(op, theta)
    act = _active_mask(d, active_tol)
    s = np.clip(s_hint, -1.0, 1.0)
    s[act] = np.sign(d[act])
    g = np.exp(theta) - x + tau * apply_transpose(op, s)
    return float(np.max(np.abs(_project_residual(g, theta, lo, hi))))


def _shift_mass(theta: np.ndarray, n: int, lo: float, hi: float) -> np.ndarray:
    """Add the constant that makes ``sum(exp(theta)) == n`` if it stays feasible.

    The penalty ignores constants, so the shift can only lower the objective.
    """
    if n <= 0:
        return theta
    shifted = theta + (math.log(n) - float(logsumexp(theta)))
    if np.any(shifted < lo) or np.any(shifted > hi):
        return theta
    return shifted


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _initial_theta(x: np.ndarray, lo: float, hi: float, theta0) -> np.ndarray:
    if theta0 is None:
        theta = np.log(x + 0.5)
    else:
        theta = np.array(theta0, dtype=float)
        if theta.shape != x.shape:
            raise DimensionError(f"theta0 must have length {x.size}, got shape {theta.shape}")
    return np.clip(theta, lo, hi)


# ---- Entry point ----


def fit(
    hist: Histogram,
    pen: PenaltySpec,
    box: BoxSpec | None = None,
    opts: SolverOptions | None = None,
    theta0=None,
) -> FitResult:
    """Solve the penalized surrogate problem on ``hist``.

    Args:
        hist: Histogram whose counts are the Poisson observations.
        pen: Penalty order, weight and norm.  ``tau`` multiplies the penalty
            as given.
        box: Optional box constraint; disabled by default.
        opts: Solver options.
        theta0: Warm start; defaults to ``log(x + 0.5)``.

    Returns:
        A ``FitResult``; ``converged`` is False when ``max_iters`` ran out
        before the KKT residual met the tolerance.

    Raises:
        DimensionError: ``k + 1 >= D``.
        UnboundedProblemError: ``tau == 0`` with an empty bin and no box.
    """
    box = box or BoxSpec()
    opts = opts or SolverOptions()
    D, n = hist.D, hist.n
    if pen.order >= D:
        raise DimensionError(f"order-{pen.order} penalty needs D > {pen.order}, got D={D}")
    if n == 0:
        raise InvalidArgumentError("histogram has no observations")

    x = hist.counts.astype(float)
    lo, hi = box.bounds(n, D)
    op = make_diff_operator(pen.order, D)
    tol_abs = opts.scaled_tol(n, D)
    polished = False
    rho: float | None = None
    active: int | None = None

    if pen.tau == 0.0:
        theta = _fit_unpenalized(x, lo, hi, box)
        iters = 0
        kkt = float(np.max(np.abs(_project_residual(np.exp(theta) - x, theta, lo, hi))))
    elif pen.norm is Norm.L2SQ:
        theta, iters, kkt = _fit_l2sq(op, x, n, pen.tau, lo, hi, tol_abs, opts, theta0)
    else:
        theta, iters, kkt, polished, rho, active = _fit_l1(op, x, n, pen.tau, lo, hi, tol_abs, opts, theta0)

    nll = poisson_nll(theta, x)
    if active is None:
        active = int(np.count_nonzero(_active_mask(apply(op, theta), opts.active_tol)))
    result = FitResult(
        theta=theta,
        objective=nll + penalty_value(op, pen, theta),
        nll=nll,
        kkt_residual=kkt,
        active_diffs=active,
        iterations=iters,
        converged=kkt <= tol_abs,
        penalty=pen,
        polished=polished,
        rho=rho,
        box_active=int(np.count_nonzero((theta <= lo + _BOUND_EPS) | (theta >= hi - _BOUND_EPS))),
    )
    if result.converged:
        logger.debug(
            "fit done  norm=%s k=%d tau=%.6g D=%d iters=%d kkt=%.3e tol=%.3e polished=%s active=%d",
            pen.norm.value, pen.k, pen.tau, D, iters, kkt, tol_abs, polished, result.active_diffs,
        )
    else:
        logger.warning(
            "fit not converged  norm=%s k=%d tau=%.6g D=%d iters=%d kkt=%.3e tol=%.3e",
            pen.norm.value, pen.k, pen.tau, D, iters, kkt, tol_abs,
        )
    return result


def _fit_unpenalized(x: np.ndarray, lo: float, hi: float, box: BoxSpec) -> np.ndarray:
    """Separable closed form ``clip(log x, lo, hi)``."""
    if not box.enabled and np.any(x == 0):
        raise UnboundedProblemError(
            "tau=0 with an empty bin has no minimizer; use tau > 0 or enable the box"
        )
    with np.errstate(divide="ignore"):
        theta = np.log(x)
    return np.clip(theta, lo, hi)


def _fit_l2sq(op, x, n, tau, lo, hi, tol_abs, opts, theta0) -> tuple[np.ndarray, int, float]:
    prob = _SmoothPoisson(op, x, c=2.0 * tau)
    theta = _initial_theta(x, lo, hi, theta0)
    theta, iters, _ = _minimize_smooth(prob, theta, lo, hi, tol_abs, opts.max_iters)

    def kkt(th: np.ndarray) -> float:
        _, g, _ = prob.value_grad(th)
        return float(np.max(np.abs(_project_residual(g, th, lo, hi))))

    shifted = _shift_mass(theta, n, lo, hi)
    k_shift, k_plain = kkt(shifted), kkt(theta)
    if k_shift <= tol_abs or k_shift <= k_plain:
        return shifted, iters, k_shift
    return theta, iters, k_plain


def _fit_l1(op, x, n, tau, lo, hi, tol_abs, opts, theta0):
    rho = opts.admm_rho or max(tau, 1.0)
    theta = _initial_theta(x, lo, hi, theta0)
    z = apply(op, theta)
    u = np.zeros(op.rows)
    prob = _SmoothPoisson(op, x, c=rho)
    inner_tol = opts.newton_inner_tol * max(1.0, n / op.dim)

    best_theta, best_kkt = theta, math.inf
    active = int(np.count_nonzero(z))
    polished = False
    polish_gap = opts.polish_every
    polish_at = polish_gap
    it = 0
    for it in range(1, opts.max_iters + 1):
        prob.c = rho
        prob.v = z - u
        theta, _, _ = _minimize_smooth(prob, theta, lo, hi, inner_tol, opts.newton_max_iters)

        d = apply(op, theta)
        z_old = z
        z = _soft_threshold(d + u, tau / rho)
        u = u + d - z

        cand = _shift_mass(theta, n, lo, hi)
        kkt = _kkt_l1(op, cand, x, tau, rho * u / tau, lo, hi, opts.active_tol)
        if kkt < best_kkt:
            best_theta, best_kkt = cand, kkt
            active = int(np.count_nonzero(z))
        if kkt <= tol_abs:
            break

        if opts.polish and it == polish_at:
            pol = _polish(op, x, tau, rho * u, lo, hi, opts.active_tol)
            if pol is not None and pol[1] <= tol_abs:
                best_theta, best_kkt, active = pol
                polished = True
                break
            # Exponential backoff after a failed polish.
            polish_gap *= 2
            polish_at = it + polish_gap

        if it % opts.rho_balance_every == 0:
            r_pri = float(np.linalg.norm(d - z))
            r_dual = rho * float(np.linalg.norm(apply_transpose(op, z - z_old)))
            if r_pri > opts.rho_balance_ratio * r_dual:
                rho *= opts.rho_factor
                u /= opts.rho_factor
            elif r_dual > opts.rho_balance_ratio * r_pri:
                rho /= opts.rho_factor
                u *= opts.rho_factor

    # A self-certified ADMM iterate still carries residue in its zero differences.
    if opts.polish and not polished:
        pol = _polish(op, x, tau, rho * u, lo, hi, opts.active_tol)
        if pol is not None and (pol[1] <= tol_abs or pol[1] <= best_kkt):
            best_theta, best_kkt, active = pol
            polished = True

    return best_theta, it, best_kkt, polished, rho, active


def _conjugate(x: np.ndarray, w: np.ndarray, lo: float, hi: float):
    """Per-bin ``sup_{lo <= t <= hi} (w t - exp(t))``, its maximizer and curvature."""
    with np.errstate(divide="ignore"):
        theta = np.clip(np.log(np.maximum(w, 0.0)), lo, hi)
    inner = (theta > lo) & (theta < hi)
    curv = np.zeros_like(w)
    curv[inner] = 1.0 / w[inner]
    return float(np.sum(w * theta - np.exp(theta))), theta, curv


def _polish(op, x, tau, y, lo, hi, active_tol) -> tuple[np.ndarray, float, int] | None:
    """Projected Newton on the dual, started from the ADMM multipliers ``y``.

    The dual of the l1 problem is ``min_{|y| <= tau} sum(phi(x - Delta^T y))``
    with ``phi`` the conjugate of ``exp`` restricted to the box; it is smooth
    with a banded Hessian ``Delta diag(1/w) Delta^T``.  Its minimizer maps to
    ``theta = clip(log(x - Delta^T y), lo, hi)``, which has exact stationarity
    and zero differences wherever ``|y| < tau``.  Without a box a wide
    artificial one is used and solutions touching it are rejected.
    """
    center = math.log(max(float(x.sum()), 1.0) / x.size)
    lo_d = lo if math.isfinite(lo) else center - _DUAL_HALF_WIDTH
    hi_d = hi if math.isfinite(hi) else center + _DUAL_HALF_WIDTH
    A = op.to_sparse()
    m = op.order

    y = np.clip(y, -tau, tau)
    f, theta, curv = _conjugate(x, x - apply_transpose(op, y), lo_d, hi_d)
    try:
        with np.errstate(over="raise", invalid="raise"):
            for _ in range(_POLISH_MAX_ITERS):
                d = apply(op, theta)
                pg = float(np.max(np.abs(y - np.clip(y + d, -tau, tau))))
                if pg <= _POLISH_GRAD * active_tol * max(1.0, float(np.max(np.abs(d)))):
                    break

                eps = min(_POLISH_BAND * tau, pg)
                binding = ((y <= -tau + eps) & (d < 0)) | ((y >= tau - eps) & (d > 0))
                free = np.flatnonzero(~binding)
                p = np.where(binding, 2.0 * tau * np.sign(d), 0.0)
                if free.size:
                    # Rows/columns of a banded matrix taken in sorted order stay banded.
                    sub = (A @ sparse.diags(curv) @ A.T).tocsr()[free][:, free]
                    ab = np.zeros((m + 1, free.size))
                    for s in range(min(m, free.size - 1) + 1):
                        ab[m - s, s:] = sub.diagonal(s)
                    ab[m] += _POLISH_RIDGE * max(1.0, float(np.max(ab[m])))
                    step = _solve_banded(ab, d[free])
                    big = float(np.max(np.abs(step)))
                    if big > 2.0 * tau:
                        step *= 2.0 * tau / big
                    p[free] = step
                gain = float(np.dot(d[free], p[free]))

                alpha = 1.0
                while True:
                    trial = np.clip(y + alpha * p, -tau, tau)
                    pred = alpha * gain - float(np.dot(d[binding], (y - trial)[binding]))
                    ft, th_t, curv_t = _conjugate(x, x - apply_transpose(op, trial), lo_d, hi_d)
                    if ft <= f - _ARMIJO * pred:
                        break
                    # Below rounding the dual value stops resolving the predicted decrease.
                    if pred <= 1e-13 * (1.0 + abs(f)) and ft - f <= 1e-13 * (1.0 + abs(f)):
                        break
                    alpha *= 0.5
                    if alpha < 1e-12:
                        break
                if alpha < 1e-12:
                    break
                y, f, theta, curv = trial, ft, th_t, curv_t
    except (linalg.LinAlgError, FloatingPointError, ValueError):
        return None

    if not np.all(np.isfinite(theta)):
        return None
    if (not math.isfinite(lo) and np.any(theta <= lo_d + _BOUND_EPS)) or (
        not math.isfinite(hi) and np.any(theta >= hi_d - _BOUND_EPS)
    ):
        return None
    d = apply(op, theta)
    kkt = _kkt_l1(op, theta, x, tau, y / tau, lo, hi, active_tol)
    return theta, kkt, int(np.count_nonzero(_active_mask(d, active_tol)))
