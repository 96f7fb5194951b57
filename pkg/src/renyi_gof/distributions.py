"""The three elliptical families: densities, exact Renyi entropies, samplers.

Supported families are the multivariate Gaussian, the multivariate Student
(heavy tails, shape ``nu > 0``) and the multivariate Pearson type II
(compact support, shape ``gamma > 0``), each parametrized by a location
vector ``a`` and a positive definite scale matrix ``Sigma``.  The scale is
not the covariance: for Student with nu > 2, ``Sigma = (1 - 2/nu) Cov``;
for Pearson II, ``Sigma = (m + 2 gamma + 2) Cov``.

Sampling uses the representation ``X = a + B (R U)`` with ``B B' = Sigma``,
``U`` uniform on the unit sphere and ``R`` the elliptical radius:

* Gaussian: ``R U`` is simply a standard normal vector;
* Pearson II: ``R^2 ~ Beta(m/2, gamma + 1)``;
* Student: drawn as ``B z sqrt(nu / w)`` with ``z ~ N(0, I)`` and
  ``w ~ chi^2_nu``, the scale-mixture form, whose squared radius satisfies
  ``R^2 / m ~ F(m, nu)`` and is verified against that law in the tests.

All randomness flows through a counter-based Philox generator keyed by an
explicit ``(root, stream)`` pair, so every draw is reproducible and
replicates on distinct streams are independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg, special
from .errors import DomainError

GAUSSIAN = "gaussian"
STUDENT = "student"
PEARSON2 = "pearson2"
FAMILIES = (GAUSSIAN, STUDENT, PEARSON2)

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Seed:
    """Generator key: identical (root, stream) means identical bitstream."""

    root: int
    stream: int = 0

    def __post_init__(self):
        for name, value in (("root", self.root), ("stream", self.stream)):
            if not 0 <= value <= _U64_MAX:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def generator(self) -> np.random.Generator:
        key = np.array([self.root, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """A family tag plus location vector, scale matrix and shape parameter.

    ``shape`` is the Student ``nu`` or the Pearson II ``gamma`` and must be
    ``None`` for the Gaussian family.
    """

    family: str
    location: np.ndarray
    scale: np.ndarray
    shape: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        location = np.asarray(self.location, dtype=float)
        scale = np.asarray(self.scale, dtype=float)
        if location.ndim != 1:
            raise ValueError(f"location must be a vector, got ndim={location.ndim}")
        m = location.shape[0]
        if scale.shape != (m, m):
            raise ValueError(f"scale must have shape ({m}, {m}), got {scale.shape}")
        if not np.array_equal(scale, scale.T):
            raise ValueError("scale matrix is not exactly symmetric")
        if self.family == GAUSSIAN:
            if self.shape is not None:
                raise DomainError("the Gaussian family takes no shape parameter")
        else:
            if self.shape is None or not self.shape > 0.0:
                raise DomainError(
                    f"family {self.family!r} needs a positive shape parameter, got {self.shape}"
                )
        object.__setattr__(self, "location", location)
        object.__setattr__(self, "scale", scale)

    @property
    def m(self) -> int:
        return self.location.shape[0]


def gaussian(location, scale) -> DistributionSpec:
    return DistributionSpec(GAUSSIAN, np.asarray(location, float), np.asarray(scale, float))


def student(nu: float, location, scale) -> DistributionSpec:
    return DistributionSpec(STUDENT, np.asarray(location, float), np.asarray(scale, float), float(nu))


def pearson2(gamma: float, location, scale) -> DistributionSpec:
    return DistributionSpec(PEARSON2, np.asarray(location, float), np.asarray(scale, float), float(gamma))


def standard(family: str, m: int, shape: float | None = None) -> DistributionSpec:
    """Centred spec with identity scale, e.g. the T_m(nu) / P_m(gamma) of
    the simulation studies."""
    return DistributionSpec(family, np.zeros(m), np.eye(m), shape)


def _mahalanobis_sq(spec: DistributionSpec, x: np.ndarray, chol: linalg.Cholesky) -> np.ndarray:
    diff = x - spec.location
    y = solve_triangular(chol.lower, diff.T, lower=True)
    return np.einsum("ij,ij->j", y, y)


def log_density(spec: DistributionSpec, x) -> float | np.ndarray:
    """Log density at one point (shape (m,)) or a batch (shape (n, m)).

    Pearson II points outside the support ellipsoid get ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != spec.m:
        raise ValueError(f"points must have {spec.m} columns, got {pts.shape[1]}")
    chol = linalg.cholesky(spec.scale)
    half_log_det = 0.5 * linalg.log_det(chol)
    qform = _mahalanobis_sq(spec, pts, chol)
    m = spec.m

    if spec.family == GAUSSIAN:
        out = -0.5 * m * math.log(2.0 * math.pi) - half_log_det - 0.5 * qform
    elif spec.family == STUDENT:
        nu = spec.shape
        log_c = (
            special.log_gamma(0.5 * (nu + m))
            - 0.5 * m * math.log(math.pi * nu)
            - special.log_gamma(0.5 * nu)
        )
        out = log_c - half_log_det - 0.5 * (nu + m) * np.log1p(qform / nu)
    else:
        gamma = spec.shape
        log_c = (
            special.log_gamma(0.5 * m + gamma + 1.0)
            - 0.5 * m * math.log(math.pi)
            - special.log_gamma(gamma + 1.0)
        )
        inside = qform < 1.0
        out = np.full(pts.shape[0], -np.inf)
        out[inside] = log_c - half_log_det + gamma * np.log1p(-qform[inside])

    return float(out[0]) if single else out


def student_entropy_const(m: int, q: float, nu: float) -> float:
    """Scale-free part of the Student Renyi entropy of order q."""
    a = 0.5 * q * (nu + m) - 0.5 * m
    if a <= 0.0:
        raise DomainError(
            f"Student entropy of order q={q} needs q(nu+m)/2 - m/2 > 0 (nu={nu}, m={m})"
        )
    ratio = special.log_beta(a, 0.5 * m) - q * special.log_beta(0.5 * nu, 0.5 * m)
    return ratio / (1.0 - q) + 0.5 * m * math.log(math.pi * nu) - special.log_gamma(0.5 * m)


def pearson2_entropy_const(m: int, q: float, gamma: float) -> float:
    """Scale-free part of the Pearson II Renyi entropy of order q."""
    a = q * gamma + 1.0
    if a <= 0.0:
        raise DomainError(f"Pearson II entropy of order q={q} needs q*gamma + 1 > 0 (gamma={gamma})")
    ratio = special.log_beta(a, 0.5 * m) - q * special.log_beta(gamma + 1.0, 0.5 * m)
    return ratio / (1.0 - q) + 0.5 * m * math.log(math.pi) - special.log_gamma(0.5 * m)


def renyi_entropy_exact(spec: DistributionSpec, q: float) -> float:
    """Closed-form Renyi entropy of order q (q > 0, q != 1).

    Every family contributes ``0.5 log|Sigma|`` plus a scale-free constant;
    the Gaussian constant is ``(m/2) log 2pi - m log(q) / (2 (1-q))``.
    """
    if q <= 0.0 or q == 1.0:
        raise DomainError(f"order must be positive and different from 1, got q={q}")
    half_log_det = 0.5 * linalg.log_det(linalg.cholesky(spec.scale))
    m = spec.m
    if spec.family == GAUSSIAN:
        return half_log_det + 0.5 * m * math.log(2.0 * math.pi) - m * math.log(q) / (2.0 * (1.0 - q))
    if spec.family == STUDENT:
        return half_log_det + student_entropy_const(m, q, spec.shape)
    return half_log_det + pearson2_entropy_const(m, q, spec.shape)


def _unit_sphere(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    z = rng.standard_normal((n, m))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample(spec: DistributionSpec, n: int, seed: Seed) -> np.ndarray:
    """Draw n i.i.d. rows from the distribution, deterministically per seed.

    Returns
    -------
    ndarray, shape (n, m)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = seed.generator()
    lower = linalg.cholesky(spec.scale).lower
    m = spec.m
    if spec.family == GAUSSIAN:
        core = rng.standard_normal((n, m))
    elif spec.family == STUDENT:
        z = rng.standard_normal((n, m))
        w = rng.chisquare(spec.shape, n)
        core = z * np.sqrt(spec.shape / w)[:, None]
    else:
        u = _unit_sphere(rng, n, m)
        r = np.sqrt(rng.beta(0.5 * m, spec.shape + 1.0, n))
        core = r[:, None] * u
    return spec.location + core @ lower.T


def sample_uniform_sphere(m: int, seed: Seed, n: int | None = None) -> np.ndarray:
    """Uniform draw(s) on the unit sphere S^(m-1).

    With ``n=None`` a single vector of shape (m,) is returned, otherwise an
    (n, m) matrix.  Directions come from normalized standard Gaussians.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    u = _unit_sphere(seed.generator(), 1 if n is None else n, m)
    return u[0] if n is None else u
