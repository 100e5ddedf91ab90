"""Tests for the synthetic benchmark densities."""
from __future__ import annotations

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from htf.errors import InvalidArgumentError
from htf.services.densities import DENSITIES, density_f1, density_f2, density_f3, get_density, uniform_density

_BREAKPOINTS = {
    "f1": [-2.0, 0.0, 3.0],
    "f2": [0.0, 1.0, 2.0, 3.0],
    "f3": [0.6, 0.69, 0.7, 0.71, 0.8],
    "uniform": [],
}


def _integral(truth) -> float:
    a, b = truth.support
    cuts = [a, *_BREAKPOINTS[truth.id], b]
    return sum(quad(truth.pdf, lo, hi, limit=500, epsabs=1e-12)[0] for lo, hi in zip(cuts, cuts[1:]))


@pytest.mark.parametrize("name", sorted(DENSITIES))
def test_integrates_to_one(name):
    """Each truth is normalized on its support."""
    assert _integral(get_density(name)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", sorted(DENSITIES))
def test_nonnegative_and_zero_outside(name):
    """pdf >= 0 on a dense grid and 0 outside the support."""
    truth = get_density(name)
    a, b = truth.support
    grid = np.linspace(a, b, 10_000)
    assert np.all(truth.pdf(grid) >= 0.0)
    assert truth.pdf(a - 0.5) == 0.0
    assert truth.pdf(b + 0.5) == 0.0


@pytest.mark.parametrize("name", sorted(DENSITIES))
def test_cdf_endpoints(name):
    """The truncated CDF runs from 0 to 1 over the support."""
    truth = get_density(name)
    a, b = truth.support
    assert truth.cdf(a) == pytest.approx(0.0, abs=1e-15)
    assert truth.cdf(b) == pytest.approx(1.0, rel=1e-12)


def test_f1_spike_dominates_center():
    """The narrow component at -2 rises above the central mode."""
    truth = density_f1()
    assert truth.pdf(-2.0) > truth.pdf(0.0)
    assert truth.support == (-5.0, 6.0)


def test_f2_left_edge():
    """f2 is 0 left of -1 and 2/7 at -1."""
    truth = density_f2()
    assert truth.pdf(-1.5) == 0.0
    assert truth.pdf(-1.0) == pytest.approx(2.0 / 7.0, rel=1e-8)


def test_f3_weights_and_local_components():
    """Weights sum to one; only the wide beta and the base uniform act at 0.2."""
    truth = density_f3()
    assert sum(truth.weights) == pytest.approx(1.0, abs=1e-15)
    expected = (0.6 * stats.beta(4.0, 4.0, loc=0.0, scale=0.6).pdf(0.2) + 1.0 / 40.0) / truth.normalizer
    assert truth.pdf(0.2) == pytest.approx(expected, rel=1e-12)


def test_uniform_density():
    """Constant 1 / (b - a); reversed bounds fail."""
    truth = uniform_density(2.0, 6.0)
    np.testing.assert_allclose(truth.pdf([2.0, 3.3, 6.0]), 0.25)
    with pytest.raises(InvalidArgumentError):
        uniform_density(1.0, 1.0)


def test_unknown_density():
    """Names outside the registry fail."""
    with pytest.raises(InvalidArgumentError):
        get_density("f9")


@pytest.mark.parametrize("name", ["f1", "f2", "f3"])
def test_sampler_matches_cdf(name):
    """A KS test at n = 1e5 does not reject the sampler."""
    truth = get_density(name)
    draws = truth.sample(100_000, np.random.default_rng(11))
    a, b = truth.support
    assert draws.min() >= a and draws.max() <= b
    assert stats.kstest(draws, truth.cdf).pvalue > 0.001


def test_sampler_is_seeded():
    """Same seed, same draws."""
    truth = density_f1()
    first = truth.sample(50, np.random.default_rng(9))
    second = truth.sample(50, np.random.default_rng(9))
    np.testing.assert_array_equal(first, second)
    with pytest.raises(InvalidArgumentError):
        truth.sample(0, np.random.default_rng(9))
