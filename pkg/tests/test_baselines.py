"""Tests for the Gaussian KDE baselines."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from htf.errors import DegenerateSampleError, InvalidArgumentError
from htf.services.baselines import (
    KdeEstimate,
    cv_bandwidth,
    cv_log_likelihood,
    default_cv_grid,
    fit_kde,
    kde_evaluate,
    reference_bandwidth,
)
from htf.services.densities import density_f1


def test_reference_bandwidth_standard_normal():
    """n=1000 standard normal draws give roughly 0.9 * 1000**-0.2."""
    y = np.random.default_rng(5).normal(size=1000)
    assert reference_bandwidth(y) == pytest.approx(0.9 * 1000 ** -0.2, rel=0.1)
    assert 0.9 * 1000 ** -0.2 == pytest.approx(0.2259, abs=5e-4)


def test_reference_bandwidth_formula():
    """Direct arithmetic on a small sample."""
    y = np.array([1.0, 2.0, 3.0, 4.0, 10.0])
    sd = np.std(y, ddof=1)
    iqr = np.percentile(y, 75) - np.percentile(y, 25)
    expected = 0.9 * min(sd, iqr / 1.34) * 5 ** -0.2
    assert reference_bandwidth(y) == pytest.approx(expected, rel=1e-12)


def test_reference_bandwidth_zero_iqr_uses_sd():
    """A zero IQR falls back to the standard deviation."""
    y = np.array([0.0] * 8 + [5.0])
    assert reference_bandwidth(y) == pytest.approx(0.9 * np.std(y, ddof=1) * 9 ** -0.2, rel=1e-12)


def test_identical_observations_rejected():
    """Zero spread has no bandwidth."""
    with pytest.raises(DegenerateSampleError):
        reference_bandwidth([2.0, 2.0, 2.0])
    with pytest.raises(InvalidArgumentError):
        reference_bandwidth([1.0])


def test_reference_bandwidth_scales_with_data(rng):
    """Scaling the sample by c scales the bandwidth by c."""
    y = rng.normal(size=200)
    assert reference_bandwidth(3.0 * y) == pytest.approx(3.0 * reference_bandwidth(y), rel=1e-12)


def test_default_cv_grid():
    """30 log-spaced points from h/10 to 10h."""
    grid = default_cv_grid(0.5)
    assert len(grid) == 30
    assert grid[0] == pytest.approx(0.05)
    assert grid[-1] == pytest.approx(5.0)


def test_singleton_grid_returns_its_value(rng):
    """With one candidate the CV choice is that candidate."""
    y = rng.normal(size=100)
    h0 = reference_bandwidth(y)
    assert cv_bandwidth(y, grid=[h0]) == h0


def test_cv_bandwidth_is_grid_argmax(rng):
    """The chosen bandwidth maximizes the held-out log-likelihood on the grid."""
    y = rng.normal(size=150)
    grid = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
    chosen = cv_bandwidth(y, grid=grid, seed=3)
    scores = [cv_log_likelihood(y, h, seed=3) for h in grid]
    assert chosen == grid[int(np.argmax(scores))]


def test_cv_is_order_invariant(rng):
    """Folds are drawn from the sorted sample."""
    y = rng.normal(size=120)
    assert cv_log_likelihood(y, 0.3) == cv_log_likelihood(rng.permutation(y), 0.3)


def test_cv_rejects_bad_folds(rng):
    """Folds must lie in [2, n]."""
    y = rng.normal(size=10)
    with pytest.raises(InvalidArgumentError):
        cv_log_likelihood(y, 0.3, folds=1)
    with pytest.raises(InvalidArgumentError):
        cv_log_likelihood(y, 0.3, folds=11)
    with pytest.raises(InvalidArgumentError):
        cv_bandwidth(y, grid=[0.1, -0.2])


def test_cv_picks_narrower_bandwidth_on_spiky_density():
    """f1's narrow spike pulls the CV bandwidth below the reference rule."""
    truth = density_f1()
    y = truth.sample(1000, np.random.default_rng(2))
    assert cv_bandwidth(y) < reference_bandwidth(y)


def test_single_point_value():
    """One observation at 0 with h=1 gives the standard normal density."""
    est = KdeEstimate(sample=np.array([0.0]), bandwidth=1.0)
    assert kde_evaluate(est, 0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-12)
    assert kde_evaluate(est, 0.0) == pytest.approx(0.3989423, abs=1e-7)


def test_symmetric_sample_gives_symmetric_estimate():
    """Evaluations mirror for a sample symmetric about zero."""
    est = KdeEstimate(sample=np.array([-1.5, -0.2, 0.2, 1.5]), bandwidth=0.4)
    x = np.linspace(0.0, 3.0, 13)
    np.testing.assert_allclose(kde_evaluate(est, x), kde_evaluate(est, -x), rtol=1e-13)


def test_kde_integrates_to_one(rng):
    """The estimate is a density."""
    est = fit_kde(rng.normal(size=50))
    lo = est.sample[0] - 12 * est.bandwidth
    hi = est.sample[-1] + 12 * est.bandwidth
    total, _ = quad(lambda t: kde_evaluate(est, t), lo, hi, limit=400)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_kde_is_permutation_invariant(rng):
    """Input order does not matter."""
    y = rng.normal(size=80)
    x = np.linspace(-3.0, 3.0, 600)
    a = kde_evaluate(fit_kde(y), x)
    b = kde_evaluate(fit_kde(rng.permutation(y)), x)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_kde_evaluate_preserves_shape(rng):
    """Array input keeps its shape; scalar input returns a float."""
    est = fit_kde(rng.normal(size=30))
    assert kde_evaluate(est, np.zeros((4, 5))).shape == (4, 5)
    assert isinstance(kde_evaluate(est, 1.0), float)


def test_fit_kde_methods(rng):
    """Both bandwidth rules produce estimates; unknown methods fail."""
    y = rng.normal(size=60)
    assert fit_kde(y, "ref").bandwidth == reference_bandwidth(y)
    assert fit_kde(y, "cv").method == "cv"
    with pytest.raises(InvalidArgumentError):
        fit_kde(y, "lscv")


def test_bandwidth_must_be_positive():
    """The estimate rejects non-positive bandwidths."""
    with pytest.raises(InvalidArgumentError):
        KdeEstimate(sample=np.array([0.0, 1.0]), bandwidth=0.0)
