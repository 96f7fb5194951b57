"""Dense symmetric linear algebra and moment statistics.

Matrices are plain float64 numpy arrays, row-major and small (dimension is
single digits in practice), so everything is dense and unblocked.  The
Cholesky factorization is written out explicitly to keep full control over
the positive-definiteness check: a pivot at or below ``1e-12`` times the
largest diagonal entry fails loudly instead of limping on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, TooFewRows

# Relative pivot tolerance; sample covariances with N >> m are well
# conditioned, so an early loud failure beats silent regularization.
PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class Cholesky:
    """Lower-triangular factor ``lower`` with ``lower @ lower.T == A``."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def _as_sym_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix must have dimension >= 1")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not exactly symmetric")
    return a


def cholesky(a) -> Cholesky:
    """Factor a symmetric positive definite matrix as ``B @ B.T``.

    Parameters
    ----------
    a : array_like, shape (m, m)
        Exactly symmetric matrix.

    Returns
    -------
    Cholesky
        Lower-triangular factor.

    Raises
    ------
    NotPositiveDefinite
        If any pivot is <= ``PIVOT_RTOL`` times the largest diagonal entry.
    """
    a = _as_sym_matrix(a)
    m = a.shape[0]
    pivot_floor = PIVOT_RTOL * max(float(np.max(np.diag(a))), 0.0)
    lower = np.zeros_like(a)
    for j in range(m):
        d = a[j, j] - lower[j, :j] @ lower[j, :j]
        if d <= pivot_floor:
            raise NotPositiveDefinite(
                f"pivot {d:.3e} at column {j} is <= {pivot_floor:.3e}; "
                "matrix is not positive definite"
            )
        lower[j, j] = math.sqrt(d)
        if j + 1 < m:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return Cholesky(lower=lower)


def log_det(c: Cholesky) -> float:
    """log-determinant of the factored matrix, ``2 * sum(log(diag(B)))``."""
    return 2.0 * float(np.sum(np.log(np.diag(c.lower))))


def sample_mean_cov(x) -> tuple[np.ndarray, np.ndarray]:
    """Column means and the N-1 divisor sample covariance of a sample.

    Parameters
    ----------
    x : array_like, shape (n, m)
        One observation per row.

    Returns
    -------
    (mean, cov)
        ``mean`` has shape (m,), ``cov`` shape (m, m) and is exactly
        symmetric (symmetrized after the matrix product, whose blocked
        accumulation can otherwise leave last-bit asymmetry).

    Raises
    ------
    TooFewRows
        If fewer than two observations are supplied.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got ndim={x.ndim}")
    n = x.shape[0]
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to form a covariance, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    cov = 0.5 * (cov + cov.T)
    return mean, cov
