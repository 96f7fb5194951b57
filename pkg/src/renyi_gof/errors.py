"""Exception types shared across the package."""


class RenyiGofError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RenyiGofError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class NotPositiveDefinite(RenyiGofError, ValueError):
    """A matrix that must be positive definite is not (degenerate sample
    covariance, or a bad user-supplied scale matrix)."""


class TooFewRows(RenyiGofError, ValueError):
    """Sample has too few rows for the requested statistic."""


class KTooLarge(RenyiGofError, ValueError):
    """Neighbour order k exceeds what the sample size allows."""


class DuplicatePoints(RenyiGofError, ValueError):
    """Sample contains coincident points where the estimator cannot
    tolerate them (zero neighbour distance with order q > 1)."""


class DegenerateSample(RenyiGofError, ValueError):
    """All sample values are equal; the test statistic is undefined."""


class NTooSmall(RenyiGofError, ValueError):
    """Sample smaller than the test supports."""


class NTooLarge(RenyiGofError, ValueError):
    """Sample larger than the approximation is valid for."""


class NonPositiveMean(RenyiGofError, ValueError):
    """Too few positive mean statistics remain for a log-log rate fit."""
