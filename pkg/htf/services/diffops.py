"""Discrete difference operators and their pseudo-inverse norms.

``Delta^(m)`` is the ``(D - m) x D`` matrix whose row ``i`` carries the
signed binomial pattern ``(-1)^j C(m, j)`` at columns ``i .. i + m`` (leading
``+1``).  It equals the m-fold product of first-difference matrices of
shrinking size, annihilates polynomials of degree ``< m`` on the grid, and
has full row rank.  Operators are stored by their ``m + 1`` integer
coefficients; products are banded convolutions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import linalg, sparse
from scipy.special import comb

from ..errors import DimensionError, InvalidArgumentError

logger = logging.getLogger("htf.diffops")

PinvNorm = Literal["inf", "one", "max"]
PinvMethod = Literal["projection", "gram"]


@dataclass(frozen=True, eq=False)
class DiffOperator:
    """Order-``m`` difference operator on ``D`` grid points."""

    order: int
    dim: int
    coeffs: np.ndarray

    @property
    def rows(self) -> int:
        return self.dim - self.order

    @property
    def bandwidth(self) -> int:
        return self.order + 1

    def to_sparse(self) -> sparse.csr_matrix:
        """Explicit sparse matrix (CSR)."""
        offsets = list(range(self.order + 1))
        diagonals = [float(c) for c in self.coeffs]
        return sparse.diags(diagonals, offsets, shape=(self.rows, self.dim), format="csr")

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def gram_banded(self) -> np.ndarray:
        """Upper banded storage of ``Delta Delta^T`` (``rows x rows``, Toeplitz)."""
        m, R = self.order, self.rows
        c = self.coeffs.astype(float)
        ab = np.zeros((m + 1, R))
        for s in range(m + 1):
            g = float(np.dot(c[s:], c[: m + 1 - s]))
            ab[m - s, s:] = g
        return ab

    def normal_banded(self) -> np.ndarray:
        """Upper banded storage of ``Delta^T Delta`` (``dim x dim``)."""
        m = self.order
        A = self.to_sparse()
        ata = (A.T @ A).tocsr()
        ab = np.zeros((m + 1, self.dim))
        for s in range(m + 1):
            ab[m - s, s:] = ata.diagonal(s)
        return ab


def make_diff_operator(m: int, D: int) -> DiffOperator:
    """Build ``Delta^(m)`` on ``D`` points.

    Raises:
        InvalidArgumentError: ``m < 1``.
        DimensionError: ``D <= m`` (the operator would have no rows).
    """
    if m < 1:
        raise InvalidArgumentError(f"difference order must be >= 1, got {m}")
    if D <= m:
        raise DimensionError(f"order-{m} differences need D >= {m + 1} points, got {D}")
    coeffs = np.array([(-1) ** j * comb(m, j, exact=True) for j in range(m + 1)], dtype=np.int64)
    coeffs.setflags(write=False)
    return DiffOperator(order=m, dim=D, coeffs=coeffs)


def apply(op: DiffOperator, v) -> np.ndarray:
    """Return ``Delta v`` (length ``D - m``); integer input stays integer."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != op.dim:
        raise DimensionError(f"expected a vector of length {op.dim}, got shape {v.shape}")
    return np.convolve(v, op.coeffs[::-1], mode="valid")


def apply_transpose(op: DiffOperator, u) -> np.ndarray:
    """Return ``Delta^T u`` (length ``D``)."""
    u = np.asarray(u)
    if u.ndim != 1 or u.size != op.rows:
        raise DimensionError(f"expected a vector of length {op.rows}, got shape {u.shape}")
    return np.convolve(u, op.coeffs, mode="full")


def polynomial_basis(D: int, m: int) -> np.ndarray:
    """Orthonormal basis (``D x m``) of the null space of ``Delta^(m)``."""
    x = np.linspace(-1.0, 1.0, D)
    q, _ = np.linalg.qr(np.vander(x, m, increasing=True))
    return q


def right_inverse_block(op: DiffOperator, r0: int, r1: int) -> np.ndarray:
    """Columns ``r0:r1`` of the banded right inverse ``B`` with ``Delta B = I``.

    ``B[i, r] = C(r - i + m - 1, m - 1)`` for ``i <= r`` and zero otherwise:
    ``m`` reverse cumulative sums of a unit vector with a zero tail.
    """
    m = op.order
    t = np.arange(r0, r1)[None, :] - np.arange(op.dim)[:, None]
    block = np.ones(t.shape)
    for s in range(1, m):
        block *= (t + s) / s
    block[t < 0] = 0.0
    return block


def pinv_norm(
    op: DiffOperator,
    which: PinvNorm = "inf",
    method: PinvMethod = "projection",
    block: int = 128,
) -> float:
    """Norm of the Moore-Penrose pseudo-inverse of ``op``.

    ``which="inf"`` is the induced infinity norm (max absolute row sum),
    ``"one"`` the induced 1-norm (max absolute column sum) and ``"max"`` the
    largest absolute entry.  The pseudo-inverse is streamed in column blocks
    and never held in full.

    ``method="projection"`` forms each block as ``(I - P) B`` with ``B`` the
    banded right inverse and ``P`` the projector onto the null space.
    ``method="gram"`` forms ``Delta^T (Delta Delta^T)^{-1}`` through a banded
    Cholesky factor; the Gram matrix has condition number growing like
    ``D^(2m)``, so this route is only accurate for moderate ``D``.
    """
    if which not in ("inf", "one", "max"):
        raise InvalidArgumentError(f"unknown norm {which!r}")
    if method not in ("projection", "gram"):
        raise InvalidArgumentError(f"unknown method {method!r}")

    R = op.rows
    row_sums = np.zeros(op.dim)
    col_max = 0.0
    entry_max = 0.0

    if method == "projection":
        q = polynomial_basis(op.dim, op.order)
        blocks = _projection_blocks(op, q, block)
    else:
        blocks = _gram_blocks(op, block)

    for cols in blocks:
        a = np.abs(cols)
        row_sums += a.sum(axis=1)
        col_max = max(col_max, float(a.sum(axis=0).max()))
        entry_max = max(entry_max, float(a.max()))

    result = {"inf": float(row_sums.max()), "one": col_max, "max": entry_max}[which]
    logger.debug("pinv_norm  m=%d  D=%d  rows=%d  which=%s  method=%s  value=%.10g",
                 op.order, op.dim, R, which, method, result)
    return result


def _projection_blocks(op: DiffOperator, q: np.ndarray, block: int):
    for r0 in range(0, op.rows, block):
        b = right_inverse_block(op, r0, min(op.rows, r0 + block))
        yield b - q @ (q.T @ b)


def _gram_blocks(op: DiffOperator, block: int):
    cb = linalg.cholesky_banded(op.gram_banded())
    At = op.to_sparse().T.tocsr()
    R = op.rows
    for r0 in range(0, R, block):
        r1 = min(R, r0 + block)
        e = np.zeros((R, r1 - r0))
        e[np.arange(r0, r1), np.arange(r1 - r0)] = 1.0
        yield At @ linalg.cho_solve_banded((cb, False), e)
