"""Single-parameter exponential families indexed by their mean.

Supported: Bernoulli, Gaussian with known variance, Poisson and Exponential
(parameterized by its mean, i.e. 1/rate). All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as K
from .errors import DomainError


class Kind(str, Enum):
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    EXPONENTIAL = "exponential"


_CODES = {
    Kind.BERNOULLI: K.BERNOULLI,
    Kind.GAUSSIAN: K.GAUSSIAN,
    Kind.POISSON: K.POISSON,
    Kind.EXPONENTIAL: K.EXPONENTIAL,
}


@dataclass(frozen=True)
class RewardFamily:
    """Reward law shared by every arm of an instance.

    ``variance`` is only meaningful for the Gaussian family.
    """

    kind: Kind
    variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not (math.isfinite(self.variance) and self.variance > 0):
            raise DomainError(f"variance must be positive and finite, got {self.variance}")

    @classmethod
    def bernoulli(cls) -> RewardFamily:
        return cls(Kind.BERNOULLI)

    @classmethod
    def gaussian(cls, variance: float = 1.0) -> RewardFamily:
        return cls(Kind.GAUSSIAN, float(variance))

    @classmethod
    def poisson(cls) -> RewardFamily:
        return cls(Kind.POISSON)

    @classmethod
    def exponential(cls) -> RewardFamily:
        return cls(Kind.EXPONENTIAL)

    @property
    def code(self) -> int:
        return _CODES[self.kind]

    @property
    def interval(self) -> tuple[float, float]:
        """Open interval of admissible means."""
        if self.kind is Kind.BERNOULLI:
            return 0.0, 1.0
        if self.kind is Kind.GAUSSIAN:
            return -math.inf, math.inf
        return 0.0, math.inf

    @property
    def allows_boundary_means(self) -> bool:
        # Empirical means of Bernoulli and Poisson samples hit 0 (and 1) with
        # positive probability; kl has finite limits there.
        return self.kind in (Kind.BERNOULLI, Kind.POISSON)

    def contains(self, mu: float) -> bool:
        lo, hi = self.interval
        return math.isfinite(mu) and lo < mu < hi

    def check_mean(self, mu: float, *, empirical: bool = False) -> float:
        mu = float(mu)
        lo, hi = self.interval
        if not math.isfinite(mu):
            raise DomainError(f"mean must be finite, got {mu}")
        if lo < mu < hi:
            return mu
        if empirical and self.allows_boundary_means and (mu == lo or mu == hi):
            return mu
        raise DomainError(f"mean {mu} outside the {self.kind.value} mean interval ({lo}, {hi})")

    def variance_of(self, mu):
        """Variance of the family member with mean ``mu`` (vectorized)."""
        mu = np.asarray(mu, dtype=float)
        if self.kind is Kind.BERNOULLI:
            return mu * (1.0 - mu)
        if self.kind is Kind.GAUSSIAN:
            return np.full_like(mu, self.variance)
        if self.kind is Kind.POISSON:
            return mu
        return mu * mu

    def sample_block(self, mu: float, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` i.i.d. rewards with mean ``mu``, as float64."""
        if self.kind is Kind.BERNOULLI:
            return (rng.random(size) < mu).astype(float)
        if self.kind is Kind.GAUSSIAN:
            return mu + math.sqrt(self.variance) * rng.standard_normal(size)
        if self.kind is Kind.POISSON:
            return rng.poisson(mu, size).astype(float)
        return rng.exponential(mu, size)


def _as_means(family: RewardFamily, x, empirical: bool) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("means must be finite")
    lo, hi = family.interval
    inside = (arr > lo) & (arr < hi)
    if empirical and family.allows_boundary_means:
        inside |= (arr == lo) | (arr == hi)
    if not np.all(inside):
        raise DomainError(f"mean outside the {family.kind.value} mean interval ({lo}, {hi})")
    return arr


def kl(family: RewardFamily, mu, mu_prime):
    """KL divergence between the members with means ``mu`` and ``mu_prime``.

    Vectorized over numpy broadcasting. ``mu`` may sit on the boundary of the
    mean interval for families whose empirical means can (Bernoulli, Poisson).
    """
    p = _as_means(family, mu, empirical=True)
    q = _as_means(family, mu_prime, empirical=False)
    kind = family.kind
    if kind is Kind.GAUSSIAN:
        out = (p - q) ** 2 / (2.0 * family.variance)
    elif kind is Kind.BERNOULLI:
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0) / q), 0.0)
            b = np.where(p < 1, (1 - p) * np.log(np.where(p < 1, 1 - p, 1.0) / (1 - q)), 0.0)
        out = a + b
    elif kind is Kind.POISSON:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0) / q), 0.0) + q - p
    else:
        r = p / q
        out = r - 1.0 - np.log(r)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def kl_bernoulli(p, q):
    """Bernoulli KL ``p ln(p/q) + (1-p) ln((1-p)/(1-q))`` for p, q strictly inside (0, 1)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if not (np.all((p > 0) & (p < 1)) and np.all((q > 0) & (q < 1))):
        raise DomainError("kl_bernoulli needs both arguments strictly inside (0, 1)")
    out = p * np.log(p / q) + (1 - p) * np.log((1 - p) / (1 - q))
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def _check_budget(c):
    c = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise DomainError("divergence budget must be finite and nonnegative")
    return c


def _invert(family, mu_hat, c, scalar_fn, array_fn):
    mu = _as_means(family, mu_hat, empirical=True)
    c = _check_budget(c)
    if mu.ndim == 0 and c.ndim == 0:
        return scalar_fn(family.code, family.variance, float(mu), float(c))
    mu, c = np.broadcast_arrays(mu, c)
    flat = array_fn(family.code, family.variance, np.ascontiguousarray(mu.ravel()),
                    np.ascontiguousarray(c.ravel()))
    return flat.reshape(mu.shape)


def kl_upper_inverse(family: RewardFamily, mu_hat, c):
    """sup{mu in I : kl(mu_hat, mu) <= c}, by bracketed bisection.

    Returns the upper end of the mean interval when no finite root exists.
    Accepts scalars or broadcastable arrays.
    """
    return _invert(family, mu_hat, c, K.upper_inverse, K.upper_inverse_array)


def kl_lower_inverse(family: RewardFamily, mu_hat, c):
    """inf{mu in I : kl(mu_hat, mu) <= c}; mirror image of :func:`kl_upper_inverse`."""
    return _invert(family, mu_hat, c, K.lower_inverse, K.lower_inverse_array)


def sample(family: RewardFamily, mu: float, rng: np.random.Generator) -> float:
    mu = family.check_mean(mu)
    return float(family.sample_block(mu, rng, 1)[0])


def variance_bound(family: RewardFamily, mean_lo: float, mean_hi: float) -> float:
    """Largest variance of the family over means in ``[mean_lo, mean_hi]``."""
    mean_lo = family.check_mean(mean_lo)
    mean_hi = family.check_mean(mean_hi)
    if not mean_lo < mean_hi:
        raise DomainError(f"empty mean range [{mean_lo}, {mean_hi}]")
    kind = family.kind
    if kind is Kind.BERNOULLI:
        if mean_lo <= 0.5 <= mean_hi:
            return 0.25
        m = mean_hi if mean_hi < 0.5 else mean_lo
        return m * (1 - m)
    if kind is Kind.GAUSSIAN:
        return family.variance
    if kind is Kind.POISSON:
        return mean_hi
    return mean_hi * mean_hi
