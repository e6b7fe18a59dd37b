"""Ground-truth quantities for a bandit instance.

Covers the suboptimality gaps, the regret hardness ``I*``, the finite-confidence
regret lower bound, the two-arm transport function ``phi`` and the max-min
sample-complexity constant ``Gamma*`` with its optimal allocation.

Arm indices are 0-based and always reported in the caller's original order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, ConvergenceError, DomainError
from .families import RewardFamily, kl, kl_bernoulli

TIE_TOL = 1e-12


@dataclass(frozen=True)
class BanditInstance:
    family: RewardFamily
    means: tuple[float, ...]
    order: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        object.__setattr__(self, "means", means)
        if len(means) < 2:
            raise ConfigError("a bandit instance needs at least two arms")
        for m in means:
            if not self.family.contains(m):
                lo, hi = self.family.interval
                raise ConfigError(
                    f"mean {m} is not strictly inside the {self.family.kind.value} interval ({lo}, {hi})")
        best = int(np.argmax(means))
        runner_up = max(m for i, m in enumerate(means) if i != best)
        if means[best] - runner_up <= TIE_TOL:
            raise ConfigError(
                "the best arm must be unique: two arms share the maximal mean "
                f"(within {TIE_TOL:g}), so no algorithm can tell them apart")
        rest = [i for i in range(len(means)) if i != best]
        object.__setattr__(self, "order", (best, *rest))

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        return self.order[0]

    @property
    def canonical_means(self) -> np.ndarray:
        """Means relabeled so that position 0 holds the best arm."""
        return np.array([self.means[i] for i in self.order])

    def to_original(self, values) -> np.ndarray:
        """Map a vector in canonical order back to the original arm labels."""
        out = np.empty(self.n_arms)
        out[list(self.order)] = np.asarray(values, dtype=float)
        return out


@dataclass(frozen=True)
class OptimalWeights:
    w: np.ndarray
    value: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9 or not self.value > 0:
            raise ConvergenceError(f"invalid optimal weights {w} / value {self.value}")
        object.__setattr__(self, "w", w)


def gaps(instance: BanditInstance) -> np.ndarray:
    means = np.asarray(instance.means)
    return means.max() - means


def hardness_i_star(instance: BanditInstance) -> float:
    """Sum over suboptimal arms of gap / kl(mu_i, mu_best)."""
    m = instance.canonical_means
    return float(np.sum((m[0] - m[1:]) / kl(instance.family, m[1:], m[0])))


def regret_lower_bound(instance: BanditInstance, delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return hardness_i_star(instance) * kl_bernoulli(delta, 1.0 - delta)


def phi(x: float, y: float, mu1: float, muj: float, family: RewardFamily) -> tuple[float, float]:
    """Minimize ``x kl(mu1, lam) + y kl(muj, lam)`` over lam.

    The minimizer is the weighted mean of the two arms. Returns ``(value, argmin)``.
    """
    if x < 0 or y < 0 or not x + y > 0:
        raise DomainError(f"phi needs nonnegative weights with positive sum, got ({x}, {y})")
    mu1 = family.check_mean(mu1)
    muj = family.check_mean(muj)
    if not mu1 > muj:
        raise DomainError(f"phi needs mu1 > muj, got {mu1} <= {muj}")
    lam = (x * mu1 + y * muj) / (x + y)
    value = x * kl(family, mu1, lam) + y * kl(family, muj, lam)
    return float(value), float(lam)


def transport_values(instance: BanditInstance, w) -> np.ndarray:
    """Per-challenger transport costs ``phi(w_best, w_j)`` in canonical order (j >= 1)."""
    m = instance.canonical_means
    wc = np.asarray(w, dtype=float)[list(instance.order)]
    return np.array([phi(wc[0], wc[j], m[0], m[j], instance.family)[0] if wc[0] + wc[j] > 0 else 0.0
                     for j in range(1, len(m))])


def _grow_bracket(fn, target, start=1.0):
    hi = start
    for _ in range(2000):
        if fn(hi) > target:
            return hi
        hi *= 2.0
    raise ConvergenceError("could not bracket the root")


def gamma_star(instance: BanditInstance) -> OptimalWeights:
    """Optimal sample allocation for identifying the best arm, and ``Gamma*``.

    For each challenger j, ``g_j(x) = phi(1, x)`` increases from 0 to
    kl(mu_best, mu_j). A common level y fixes the challenger weights
    ``x_j = g_j^{-1}(y)``; the optimum is the level at which
    ``sum_j kl(mu_best, lam_j) / kl(mu_j, lam_j) = 1``.
    """
    fam = instance.family
    m = instance.canonical_means
    mu1, rest = m[0], m[1:]

    def g(j, x):
        return phi(1.0, x, mu1, rest[j], fam)[0]

    def x_of(j, y):
        hi = _grow_bracket(lambda x: g(j, x), y)
        return brentq(lambda x: g(j, x) - y, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)

    def excess(y):
        total = 0.0
        for j, muj in enumerate(rest):
            x = x_of(j, y)
            lam = (mu1 + x * muj) / (1.0 + x)
            denom = kl(fam, muj, lam)
            if denom <= 0.0:
                return math.inf
            total += kl(fam, mu1, lam) / denom
        return total - 1.0

    y_max = float(np.min(kl(fam, mu1, rest)))
    lo, hi = 0.0, 0.5 * y_max
    while excess(hi) < 0:
        lo, hi = hi, 0.5 * (hi + y_max)
        if y_max - hi < y_max * 1e-14:
            raise ConvergenceError("transport equation has no root below the top level")
    if lo == 0.0:
        lo = hi * 1e-12
    try:
        y = brentq(excess, lo, hi, xtol=1e-15 * y_max, rtol=1e-15, maxiter=500)
    except ValueError as exc:
        raise ConvergenceError(str(exc)) from exc
    x = np.array([1.0] + [x_of(j, y) for j in range(len(rest))])
    w = x / x.sum()
    value = float(x.sum() / y)
    return OptimalWeights(instance.to_original(w), value)


def sample_optimal_regret_ratio(instance: BanditInstance) -> float:
    """Regret of the sample-optimal allocation relative to the regret-optimal rate.

    Both grow like log(1/delta); this is the ratio of their coefficients,
    ``Gamma* * sum_i w_i gap_i / I*``.
    """
    opt = gamma_star(instance)
    return float(opt.value * np.dot(opt.w, gaps(instance)) / hardness_i_star(instance))
