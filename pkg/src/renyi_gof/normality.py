"""Shapiro-Wilk test of normality.

Thin contract layer over scipy's implementation of Royston's AS R94
approximation (order-statistic weights plus a normalizing transformation
for the p-value), which is valid for sample sizes up to 5000.  Input
validation and the p-value clamp live here so callers get stable,
well-typed failures instead of warnings or NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import DegenerateSample, NTooLarge, NTooSmall

MIN_N = 3
MAX_N = 5000
_P_FLOOR = 1e-300


@dataclass(frozen=True)
class SWResult:
    """W statistic in (0, 1], its p-value and the sample size."""

    w: float
    p_value: float
    n: int


def shapiro_wilk(x) -> SWResult:
    """Test a univariate sample for normality.

    Parameters
    ----------
    x : array_like, shape (n,)
        Sample with 3 <= n <= 5000 and nonzero range.

    Raises
    ------
    NTooSmall, NTooLarge, DegenerateSample
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D sample, got ndim={x.ndim}")
    n = x.shape[0]
    if n < MIN_N:
        raise NTooSmall(f"need at least {MIN_N} observations, got {n}")
    if n > MAX_N:
        raise NTooLarge(f"the approximation is valid up to n={MAX_N}, got {n}")
    if float(np.max(x)) == float(np.min(x)):
        raise DegenerateSample("all observations are equal")
    res = scipy.stats.shapiro(x)
    p = min(max(float(res.pvalue), _P_FLOOR), 1.0)
    return SWResult(w=float(res.statistic), p_value=p, n=n)
