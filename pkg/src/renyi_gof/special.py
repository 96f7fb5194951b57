"""Log-domain special functions and the estimator's normalizing constants.

Everything is kept in log space: the gamma-function ratios that appear in
the neighbour-statistic normalizer and the unit-ball volume overflow for
quite moderate arguments if evaluated raw.
"""

from __future__ import annotations

import math

from .errors import DomainError


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a+b)."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"log_beta requires positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def log_unit_ball_volume(m: int) -> float:
    """log of the Euclidean unit-ball volume pi^(m/2) / Gamma(m/2 + 1)."""
    if m < 1:
        raise DomainError(f"dimension must be >= 1, got {m}")
    return 0.5 * m * math.log(math.pi) - math.lgamma(0.5 * m + 1.0)


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in R^m."""
    return math.exp(log_unit_ball_volume(m))


def log_c_k(k: int, q: float) -> float:
    """log of the neighbour-statistic normalizer [Gamma(k)/Gamma(k+1-q)]^(1/(1-q)).

    Defined for k >= 1 and q != 1 with k + 1 - q > 0; the latter is the
    ``k > 1/gamma`` restriction of the Pearson II statistic, since its
    order is q = 1 + 1/gamma.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if q == 1.0:
        raise DomainError("order q = 1 is not supported")
    if k + 1.0 - q <= 0.0:
        raise DomainError(f"c_k requires k + 1 - q > 0, got k={k}, q={q}")
    return (math.lgamma(k) - math.lgamma(k + 1.0 - q)) / (1.0 - q)


def c_k(k: int, q: float) -> float:
    """The normalizer itself; always positive."""
    return math.exp(log_c_k(k, q))
