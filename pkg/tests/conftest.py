"""Shared fixtures for pytest."""
from __future__ import annotations

import logging

import numpy as np
import pytest
from scipy.optimize import minimize

from htf.services.binning import Histogram, make_sample
from htf.services.diffops import make_diff_operator, polynomial_basis, right_inverse_block


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance reproductions")


@pytest.fixture(autouse=True)
def _reset_htf_logging():
    """Drop handlers installed by configure_logging so each test starts clean."""
    yield
    root = logging.getLogger("htf")
    for handler in list(root.handlers):
        if getattr(handler, "_htf_handler", False):
            root.removeHandler(handler)
            handler.close()
    root.propagate = True
    root.setLevel(logging.NOTSET)


@pytest.fixture
def rng():
    """Seeded generator for reproducible random instances."""
    return np.random.default_rng(20240607)


@pytest.fixture
def oracle_hist():
    """Six-bin instance used for the oracle comparisons."""
    return Histogram.from_counts([1, 6, 2, 8, 3, 9])


@pytest.fixture
def uniform_sample():
    """10000 uniform(0, 1) draws on support [0, 1] (seed 1)."""
    values = np.random.default_rng(1).uniform(0.0, 1.0, 10000)
    return make_sample(values, (0.0, 1.0))


def _l1_oracle(counts, k: int, tau: float) -> tuple[float, np.ndarray]:
    """Minimize ``l(theta) + tau ||Delta theta||_1`` by a smooth reformulation.

    ``theta = V beta + B (p - q)`` with ``p, q >= 0``, ``V`` spanning the
    null space of ``Delta`` and ``B`` its banded right inverse, so the
    penalty becomes ``tau * sum(p + q)`` and L-BFGS-B applies.
    """
    x = np.asarray(counts, dtype=float)
    D = x.size
    op = make_diff_operator(k + 1, D)
    V = polynomial_basis(D, k + 1)
    B = right_inverse_block(op, 0, op.rows)
    m, R = V.shape[1], op.rows

    def unpack(z):
        beta, p, q = z[:m], z[m:m + R], z[m + R:]
        return V @ beta + B @ (p - q), p, q

    def fun(z):
        theta, p, q = unpack(z)
        e = np.exp(theta)
        value = float(np.sum(e - x * theta) + tau * np.sum(p + q))
        g = e - x
        gb = B.T @ g
        return value, np.concatenate([V.T @ g, gb + tau, -gb + tau])

    theta0 = np.log(x + 0.5)
    d0 = np.convolve(theta0, op.coeffs[::-1], mode="valid")
    beta0 = V.T @ (theta0 - B @ d0)
    z0 = np.concatenate([beta0, np.maximum(d0, 0.0), np.maximum(-d0, 0.0)])
    bounds = [(None, None)] * m + [(0.0, None)] * (2 * R)
    res = minimize(fun, z0, jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": 50000, "maxfun": 100000, "ftol": 1e-16, "gtol": 1e-12})
    theta, _, _ = unpack(res.x)
    return float(res.fun), theta


@pytest.fixture
def l1_oracle():
    """Independent solver for the l1 problem: ``oracle(counts, k, tau) -> (objective, theta)``."""
    return _l1_oracle
