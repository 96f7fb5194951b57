"""Nearest-neighbour estimators of the Renyi integral G_q and entropy H_q.

For a sample X_1..X_N the integral G_q = E[f^{q-1}(X)] is estimated by the
sample mean of ``zeta_i^(1-q)`` with ``zeta_i = (N-1) C_k V_m rho_i^m``,
where rho_i is the k-th nearest-neighbour distance of X_i, V_m the
unit-ball volume and C_k the gamma-ratio normalizer.  The entropy estimate
is ``log(G) / (1-q)``.

Each term is evaluated in log space (``m log rho`` instead of ``rho^m``) so
neither large dimension nor tiny distances overflow, and the average uses a
max-shifted exponential sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import knn, special
from .distributions import STUDENT, DistributionSpec
from .errors import DomainError, DuplicatePoints, KTooLarge


@dataclass(frozen=True)
class EntropyEstimate:
    """Point estimates of G_q (``g_hat``) and H_q (``h_hat``)."""

    g_hat: float
    h_hat: float
    n: int
    m: int
    k: int
    q: float


def estimate_from_rho(rho_k, n: int, m: int, k: int, q: float) -> EntropyEstimate:
    """Estimate from precomputed k-th neighbour distances.

    This is the workhorse behind `estimate_g`; shape-parameter fitting calls
    it directly so one neighbour pass can be reused across many orders q
    (the distances do not depend on q).
    """
    if q <= 0.0 or q == 1.0:
        raise DomainError(f"order must be positive and different from 1, got q={q}")
    rho_k = np.asarray(rho_k, dtype=float)
    log_ck = special.log_c_k(k, q)  # validates k + 1 - q > 0
    if q > 1.0 and not np.all(rho_k > 0.0):
        raise DuplicatePoints(
            "zero neighbour distance with q > 1: zeta^(1-q) is undefined; "
            "dedupe the sample explicitly if duplicates are expected"
        )
    with np.errstate(divide="ignore"):
        log_zeta = (
            math.log(n - 1) + log_ck + special.log_unit_ball_volume(m) + m * np.log(rho_k)
        )
    t = (1.0 - q) * log_zeta
    t_max = float(np.max(t))
    if t_max == -math.inf:  # every point duplicated, q < 1
        return EntropyEstimate(g_hat=0.0, h_hat=-math.inf, n=n, m=m, k=k, q=q)
    log_g = t_max + math.log(float(np.mean(np.exp(t - t_max))))
    g_hat = math.exp(log_g)
    return EntropyEstimate(g_hat=g_hat, h_hat=log_g / (1.0 - q), n=n, m=m, k=k, q=q)


def estimate_g(x, k: int, q: float) -> EntropyEstimate:
    """Estimate G_q and H_q from a sample matrix.

    Parameters
    ----------
    x : array_like, shape (n, m)
        One observation per row.
    k : int
        Neighbour order, with ``n >= k + 2``.
    q : float
        Entropy order, positive, != 1, and with ``k + 1 - q > 0``.

    Raises
    ------
    KTooLarge, DomainError, DuplicatePoints
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got ndim={x.ndim}")
    n, m = x.shape
    if n < k + 2:
        raise KTooLarge(f"need at least k + 2 = {k + 2} points, got {n}")
    rho_k = knn.knn_all(x, k).rho[:, k - 1]
    return estimate_from_rho(rho_k, n=n, m=m, k=k, q=q)


def estimate_h(x, k: int, q: float) -> float:
    """The entropy estimate alone; see `estimate_g`."""
    return estimate_g(x, k, q).h_hat


def critical_moment(spec: DistributionSpec) -> float:
    """Largest r with a finite r-th absolute moment: nu for Student
    (tail decay ||x||^-(nu+m)), infinite for Gaussian and Pearson II."""
    return float(spec.shape) if spec.family == STUDENT else math.inf


def check_moment_condition(spec: DistributionSpec, q: float, order: int = 1) -> bool:
    """Whether the sufficient tail condition for estimator convergence holds.

    ``order=1`` checks convergence in mean (critical moment above
    ``m (1-q) / q``), ``order=2`` convergence in mean square (above
    ``2 m (1-q) / (2q - 1)``, which additionally needs q > 1/2).  For q > 1
    both thresholds are negative and the check passes trivially.  These
    conditions are sufficient, not necessary, so callers should warn rather
    than refuse when they fail.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if q <= 0.0 or q == 1.0:
        raise DomainError(f"order must be positive and different from 1, got q={q}")
    m = spec.m
    r_c = critical_moment(spec)
    if order == 1:
        return r_c > m * (1.0 - q) / q
    if q <= 0.5:
        return False
    return r_c > 2.0 * m * (1.0 - q) / (2.0 * q - 1.0)
