"""Maximum-entropy goodness-of-fit statistics and shape-parameter fitting.

Among all densities with a given mean and covariance, the Renyi entropy of
order q is maximized by a Student distribution when m/(m+2) < q < 1 (with
nu = 1/(1-q) - m) and by a Pearson type II distribution when q > 1 (with
gamma = 1/(q-1)).  The test statistic is the gap between that maximal
entropy -- evaluated at the sample covariance -- and the nearest-neighbour
entropy estimate of the data:

    W = h_max(sample covariance) - h_hat(data).

Under the hypothesized family W tends to zero in probability; otherwise it
tends to a positive constant.  Minimizing W over the shape parameter gives
a point estimate of nu or gamma.

The entropy estimate is taken on the raw data; the sample covariance enters
only through h_max.  Both terms shift by m log c under data scaling x -> cx,
so W is scale invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import estimator, knn, linalg
from .distributions import PEARSON2, STUDENT, pearson2_entropy_const, student_entropy_const
from .errors import DomainError, KTooLarge

GOLDEN_TOL = 1e-3
GRID_POINTS = 40
# nu -> 2+ degenerates the scale (1 - 2/nu) C; keep fits strictly inside.
STUDENT_SHAPE_FLOOR = 2.05
STUDENT_DEFAULT_BOUNDS = (2.5, 10.0)
PEARSON2_DEFAULT_BOUNDS = (1.0, 6.0)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TestResult:
    """One evaluation of the entropy-gap statistic."""

    statistic: float
    family: str
    m: int
    k: int
    n: int
    shape: float
    q: float
    h_max: float
    h_hat: float
    log_det_sigma_hat: float


@dataclass(frozen=True)
class FitResult:
    """Shape-parameter point estimate with the full evaluation trace.

    ``no_minimum_in_bounds`` is set when the coarse-grid minimizer sits on a
    boundary of the search interval; the estimate is still reported.
    """

    shape_hat: float
    statistic_at_min: float
    trace: list[tuple[float, float]] = field(default_factory=list)
    no_minimum_in_bounds: bool = False


def student_order(m: int, nu: float) -> float:
    """Entropy order tested against Student(nu) in dimension m."""
    return 1.0 - 1.0 / (nu + m)


def pearson2_order(gamma: float) -> float:
    """Entropy order tested against Pearson II(gamma)."""
    return 1.0 + 1.0 / gamma


def _h_max(family: str, m: int, shape: float, cov_hat) -> tuple[float, float, float]:
    """(h_max, q, log_det_sigma_hat) for the hypothesized family."""
    if family == STUDENT:
        if shape <= 2.0:
            raise DomainError(f"Student test needs nu > 2, got nu={shape}")
        q = student_order(m, shape)
        sigma_hat = (1.0 - 2.0 / shape) * np.asarray(cov_hat, dtype=float)
        const = student_entropy_const(m, q, shape)
    elif family == PEARSON2:
        if shape <= 0.0:
            raise DomainError(f"Pearson II test needs gamma > 0, got gamma={shape}")
        q = pearson2_order(shape)
        sigma_hat = (2.0 * shape + m + 2.0) * np.asarray(cov_hat, dtype=float)
        const = pearson2_entropy_const(m, q, shape)
    else:
        raise DomainError(f"no maximum-entropy family {family!r}")
    ld = linalg.log_det(linalg.cholesky(sigma_hat))
    return 0.5 * ld + const, q, ld


def h_max_student(m: int, nu: float, cov_hat) -> tuple[float, float]:
    """Largest order-q entropy for covariance ``cov_hat``, q = 1 - 1/(nu+m).

    The maximizing density is Student with scale (1 - 2/nu) cov_hat; returns
    (h_max, q).  Requires nu > 2.
    """
    h_max, q, _ = _h_max(STUDENT, m, nu, cov_hat)
    return h_max, q


def h_max_pearson(m: int, gamma: float, cov_hat) -> tuple[float, float]:
    """Largest order-q entropy for covariance ``cov_hat``, q = 1 + 1/gamma.

    The maximizing density is Pearson II with scale (2 gamma + m + 2)
    cov_hat; returns (h_max, q).
    """
    h_max, q, _ = _h_max(PEARSON2, m, gamma, cov_hat)
    return h_max, q


def _check_pearson_k(k: int, gamma: float) -> None:
    if k * gamma <= 1.0:
        raise DomainError(
            f"the Pearson II statistic is defined only for k > 1/gamma; "
            f"got k={k}, gamma={gamma} (1/gamma={1.0 / gamma:g})"
        )


def w_statistics(x, ks, family: str, shape: float) -> dict[int, TestResult]:
    """Entropy-gap statistics for several neighbour orders of one sample.

    A single neighbour pass with ``k_max = max(ks)`` is shared by all
    orders, which is what makes parameter sweeps affordable.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got ndim={x.ndim}")
    ks = tuple(int(k) for k in ks)
    if not ks or min(ks) < 1:
        raise ValueError(f"neighbour orders must be positive, got {ks}")
    if family == PEARSON2:
        for k in ks:
            _check_pearson_k(k, shape)
    n, m = x.shape
    if n < max(ks) + 2:
        raise KTooLarge(f"need at least max(k) + 2 = {max(ks) + 2} points, got {n}")
    _, cov = linalg.sample_mean_cov(x)
    h_max, q, ld = _h_max(family, m, shape, cov)
    rho = knn.knn_all(x, max(ks)).rho
    out = {}
    for k in ks:
        est = estimator.estimate_from_rho(rho[:, k - 1], n=n, m=m, k=k, q=q)
        out[k] = TestResult(
            statistic=h_max - est.h_hat,
            family=family,
            m=m,
            k=k,
            n=n,
            shape=float(shape),
            q=q,
            h_max=h_max,
            h_hat=est.h_hat,
            log_det_sigma_hat=ld,
        )
    return out


def w_student(x, k: int, nu: float) -> TestResult:
    """Student goodness-of-fit statistic W at neighbour order k."""
    return w_statistics(x, (k,), STUDENT, nu)[k]


def w_pearson(x, k: int, gamma: float) -> TestResult:
    """Pearson II goodness-of-fit statistic W at neighbour order k.

    Defined only for k > 1/gamma, and the sample must be free of duplicate
    rows (the estimator order q = 1 + 1/gamma exceeds 1).
    """
    return w_statistics(x, (k,), PEARSON2, gamma)[k]


def _shape_floor(family: str, k: int) -> float:
    if family == STUDENT:
        return STUDENT_SHAPE_FLOOR
    # k > 1/gamma, nudged strictly inside the open boundary
    return 1.0 / k + 1e-3


def fit_shape(x, k: int, family: str, bounds: tuple[float, float] | None = None,
              grid_points: int = GRID_POINTS, tol: float = GOLDEN_TOL) -> FitResult:
    """Point-estimate the shape parameter by minimizing the gap statistic.

    A log-spaced coarse grid over ``bounds`` is scanned first, then the best
    interior bracket is refined by golden-section search to ``tol``.  The
    statistic is a noisy, non-smooth function of the shape, so no
    derivative-based method is used.  One neighbour pass and one covariance
    factorization are shared across every evaluation.

    Bounds at or below the admissible domain are nudged inside it
    (Student: 2.05; Pearson II: 1/k + 1e-3), so the conventional Pearson
    search range [1, 6] is usable even at k = 1.
    """
    if family not in (STUDENT, PEARSON2):
        raise DomainError(f"no maximum-entropy family {family!r}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got ndim={x.ndim}")
    n, m = x.shape
    if n < k + 2:
        raise KTooLarge(f"need at least k + 2 = {k + 2} points, got {n}")
    if grid_points < 1:
        raise ValueError(f"grid_points must be >= 1, got {grid_points}")
    if bounds is None:
        bounds = STUDENT_DEFAULT_BOUNDS if family == STUDENT else PEARSON2_DEFAULT_BOUNDS
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (lo > 0.0 and hi >= lo):
        raise DomainError(f"invalid bounds ({lo}, {hi})")
    lo = max(lo, _shape_floor(family, k))
    if hi < lo:
        raise DomainError(f"bounds ({bounds[0]}, {bounds[1]}) lie outside the admissible domain")

    rho_k = knn.knn_all(x, k).rho[:, k - 1]
    _, cov = linalg.sample_mean_cov(x)

    def statistic(shape: float) -> float:
        h_max, q, _ = _h_max(family, m, shape, cov)
        est = estimator.estimate_from_rho(rho_k, n=n, m=m, k=k, q=q)
        return h_max - est.h_hat

    grid = np.geomspace(lo, hi, grid_points)
    trace = [(float(s), statistic(float(s))) for s in grid]
    best_idx = min(range(len(trace)), key=lambda i: trace[i][1])
    on_boundary = grid_points > 1 and best_idx in (0, len(grid) - 1)

    if grid_points >= 3 and not on_boundary:
        a, b = float(grid[best_idx - 1]), float(grid[best_idx + 1])
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        fc, fd = statistic(c), statistic(d)
        trace.append((c, fc))
        trace.append((d, fd))
        while b - a > tol:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _INV_PHI * (b - a)
                fc = statistic(c)
                trace.append((c, fc))
            else:
                a, c, fc = c, d, fd
                d = a + _INV_PHI * (b - a)
                fd = statistic(d)
                trace.append((d, fd))

    shape_hat, stat_min = min(trace, key=lambda sv: sv[1])
    return FitResult(
        shape_hat=shape_hat,
        statistic_at_min=stat_min,
        trace=trace,
        no_minimum_in_bounds=on_boundary,
    )
