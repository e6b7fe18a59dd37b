"""Double KL-UCB: best-arm identification at a prescribed confidence with small regret.

At every round the algorithm computes, for each arm, a KL upper confidence
bound with the slowly growing exploration budget ``3 log t`` (the f-index) and
another with the confidence-dependent budget ``log(2 K t^2 / delta)`` (the
g-index). The f-leader and the best g-index among the other arms are the two
candidates; a coin with heads probability ``coin_bias(delta)`` picks between
them. Sampling stops once the leader's lower g-bound clears the challenger's
upper g-bound.

Two equivalent execution paths are provided: :func:`step` advances an
explicit :class:`AlgState` one round at a time (used for tracing and tests),
and :func:`run` drives the compiled loop in ``_kernels``. Both consume the
same buffered random streams, so they produce identical trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .errors import ConfigError, DomainError
from .oracles import BanditInstance, gaps

RULES = {"dkl_ucb": K.RULE_DKL, "klucb_stop": K.RULE_KLUCB, "uniform_stop": K.RULE_UNIFORM}
SCHEDULES = {"3log": K.SCHEDULE_3LOG, "log_loglog": K.SCHEDULE_LOG_LOGLOG}
DEFAULT_HORIZON_CAP = 10_000_000
BLOCK = 2048


def f_exploration(t: int) -> float:
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    return 3.0 * math.log(t)


def g_exploration(delta: float, t: int, n_arms: int) -> float:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if t < 1 or n_arms < 2:
        raise DomainError(f"need t >= 1 and at least two arms, got t={t}, K={n_arms}")
    return math.log(2.0 * n_arms * t * t / delta)


def coin_bias(delta: float) -> float:
    """Heads probability ``1 - min(1 / log log(1/delta), 1/2)``.

    For delta >= 1/e the double logarithm is not positive and the bias is
    pinned at 1/2, the value the formula already takes for log log(1/delta) <= 2.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    gamma = math.log(math.log(1.0 / delta))
    if gamma <= 0.0:
        return 0.5
    return 1.0 - min(1.0 / gamma, 0.5)


class RandomSource:
    """Per-trial randomness: one coin stream and one reward stream per arm.

    Each stream is drawn in fixed-size blocks, so the value consumed at a given
    position never depends on how the consumer interleaves its requests.
    """

    def __init__(self, seed, family, means, block: int = BLOCK):
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        children = ss.spawn(len(means) + 1)
        self.family = family
        self.means = np.asarray(means, dtype=float)
        self.block = block
        self._coin_rng = np.random.default_rng(children[0])
        self._arm_rngs = [np.random.default_rng(c) for c in children[1:]]
        self.coin_buf = np.empty(block)
        self.coin_pos = np.zeros(1, dtype=np.int64)
        self.reward_buf = np.empty((len(means), block))
        self.reward_pos = np.zeros(len(means), dtype=np.int64)
        self._refill_coin()
        for arm in range(len(means)):
            self._refill_arm(arm)

    def _refill_coin(self):
        self.coin_buf[:] = self._coin_rng.random(self.block)
        self.coin_pos[0] = 0

    def _refill_arm(self, arm):
        self.reward_buf[arm] = self.family.sample_block(self.means[arm], self._arm_rngs[arm], self.block)
        self.reward_pos[arm] = 0

    def refill_exhausted(self):
        if self.coin_pos[0] >= self.block:
            self._refill_coin()
        for arm in np.flatnonzero(self.reward_pos >= self.block):
            self._refill_arm(arm)

    def coin(self) -> float:
        if self.coin_pos[0] >= self.block:
            self._refill_coin()
        u = self.coin_buf[self.coin_pos[0]]
        self.coin_pos[0] += 1
        return float(u)

    def reward(self, arm: int) -> float:
        if self.reward_pos[arm] >= self.block:
            self._refill_arm(arm)
        x = self.reward_buf[arm, self.reward_pos[arm]]
        self.reward_pos[arm] += 1
        return float(x)


@dataclass
class AlgState:
    instance: BanditInstance
    delta: float
    rng: RandomSource
    rule: str = "dkl_ucb"
    schedule: str = "3log"
    t: int = 0
    counts: np.ndarray = field(default=None)
    sums: np.ndarray = field(default=None)
    pseudo_regret: float = 0.0
    realized_regret: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.rule not in RULES:
            raise ConfigError(f"unknown sampling rule {self.rule!r}")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"unknown exploration schedule {self.schedule!r}")
        k = self.instance.n_arms
        if self.counts is None:
            self.counts = np.zeros(k, dtype=np.int64)
        if self.sums is None:
            self.sums = np.zeros(k)

    @property
    def family(self):
        return self.instance.family

    @property
    def n_arms(self) -> int:
        return self.instance.n_arms

    @property
    def empirical_means(self) -> np.ndarray:
        return self.sums / self.counts

    def pull(self, arm: int) -> float:
        x = self.rng.reward(arm)
        means = self.instance.means
        best = max(means)
        self.counts[arm] += 1
        self.sums[arm] += x
        self.t += 1
        self.pseudo_regret += best - means[arm]
        self.realized_regret += best - x
        return x


@dataclass(frozen=True)
class Indices:
    f_upper: np.ndarray
    g_upper: np.ndarray
    g_lower: np.ndarray


@dataclass(frozen=True)
class StepOutcome:
    pulled_arm: Optional[int]
    reward: Optional[float]
    candidate_f: int
    candidate_g: int
    coin_heads: Optional[bool]
    stopped: bool
    recommendation: Optional[int]
    indices: Indices


@dataclass(frozen=True)
class TrialResult:
    tau: int
    pseudo_regret: float
    realized_regret: float
    recommendation: int
    correct: bool
    censored: bool
    counts: tuple[int, ...]


def initialize(instance: BanditInstance, delta: float, rng: RandomSource, rule: str = "dkl_ucb",
               schedule: str = "3log") -> AlgState:
    """Fresh state after pulling every arm once (t = K)."""
    state = AlgState(instance, delta, rng, rule=rule, schedule=schedule)
    for arm in range(instance.n_arms):
        state.pull(arm)
    return state


def compute_indices(state: AlgState, t: Optional[int] = None) -> Indices:
    """All three confidence bounds for decision time ``t`` (default ``state.t + 1``)."""
    if np.any(state.counts < 1):
        raise DomainError("every arm must be pulled once before indices exist")
    t = state.t + 1 if t is None else t
    k = state.n_arms
    uf, ug, lg = np.empty(k), np.empty(k), np.empty(k)
    f_t = K.f_value(SCHEDULES[state.schedule], float(t))
    K.compute_indices(state.family.code, state.family.variance, state.counts, state.sums,
                      f_t, g_exploration(state.delta, t, k), uf, ug, lg)
    return Indices(uf, ug, lg)


def index_f(state: AlgState, i: int) -> float:
    return float(compute_indices(state).f_upper[i])


def index_g_upper(state: AlgState, i: int) -> float:
    return float(compute_indices(state).g_upper[i])


def index_g_lower(state: AlgState, i: int) -> float:
    return float(compute_indices(state).g_lower[i])


def select_candidates(f_upper, g_upper) -> tuple[int, int]:
    """f-leader and best g-index among the remaining arms; ties go to the lowest index."""
    f_upper = np.asarray(f_upper, dtype=float)
    g_upper = np.asarray(g_upper, dtype=float)
    if f_upper.shape[0] < 2:
        raise DomainError("need at least two arms")
    af, ag = K.candidates(f_upper, g_upper)
    return int(af), int(ag)


def should_stop(indices: Indices, a_f: int, a_g: int) -> bool:
    return bool(indices.g_lower[a_f] > indices.g_upper[a_g])


def step(state: AlgState, env: Optional[BanditInstance] = None, force_coin: Optional[bool] = None) -> StepOutcome:
    """Decide round ``t + 1``: stop and recommend, or pull one arm.

    The stopping test runs on the candidates before any coin is flipped, so a
    stopping round consumes no sample. ``force_coin`` overrides the coin (the
    coin stream is still advanced, keeping later draws aligned).
    """
    if env is not None and env is not state.instance and env != state.instance:
        raise ConfigError("environment does not match the state's instance")
    ind = compute_indices(state)
    af, ag = select_candidates(ind.f_upper, ind.g_upper)
    if should_stop(ind, af, ag):
        return StepOutcome(None, None, af, ag, None, True, af, ind)
    heads = None
    if state.rule == "dkl_ucb":
        heads = state.rng.coin() < coin_bias(state.delta)
        if force_coin is not None:
            heads = bool(force_coin)
        arm = af if heads else ag
    elif state.rule == "klucb_stop":
        arm = af
    else:
        arm = state.t % state.n_arms
    x = state.pull(arm)
    return StepOutcome(arm, x, af, ag, heads, False, None, ind)


def _result(state: AlgState, recommendation: int, censored: bool) -> TrialResult:
    rec = int(recommendation)
    return TrialResult(
        tau=int(state.t),
        pseudo_regret=float(state.pseudo_regret),
        realized_regret=float(state.realized_regret),
        recommendation=rec,
        correct=(rec == state.instance.best_arm) and not censored,
        censored=censored,
        counts=tuple(int(c) for c in state.counts),
    )


def run_stepwise(instance: BanditInstance, delta: float, seed, horizon_cap: int = DEFAULT_HORIZON_CAP,
                 rule: str = "dkl_ucb", schedule: str = "3log",
                 on_step: Optional[Callable[[AlgState, StepOutcome], None]] = None,
                 on_init: Optional[Callable[[AlgState], None]] = None) -> TrialResult:
    """Reference implementation of one trial through :func:`step`."""
    _check_cap(instance, horizon_cap)
    state = initialize(instance, delta, _source(seed, instance), rule, schedule)
    if on_init is not None:
        on_init(state)
    while state.t < horizon_cap:
        out = step(state)
        if on_step is not None:
            on_step(state, out)
        if out.stopped:
            return _result(state, out.recommendation, censored=False)
    ind = compute_indices(state)
    return _result(state, select_candidates(ind.f_upper, ind.g_upper)[0], censored=True)


def run(instance: BanditInstance, delta: float, seed, horizon_cap: int = DEFAULT_HORIZON_CAP,
        rule: str = "dkl_ucb", schedule: str = "3log") -> TrialResult:
    """One trial of a sampling rule with the shared g-based stopping rule.

    ``pseudo_regret`` sums the gaps of pulled arms; ``realized_regret`` sums
    ``mu_best - reward``. Censored trials (cap reached) report the current
    f-leader and are never counted as correct.
    """
    _check_cap(instance, horizon_cap)
    state = initialize(instance, delta, _source(seed, instance), rule, schedule)
    src = state.rng
    fam = instance.family
    acc = np.array([state.t, state.pseudo_regret, state.realized_regret, -1.0])
    means = np.asarray(instance.means, dtype=float)
    beta = coin_bias(delta)
    while True:
        status = K.run_block(fam.code, fam.variance, RULES[rule], SCHEDULES[schedule], beta, delta,
                             state.counts, state.sums, acc, means, src.coin_buf, src.coin_pos,
                             src.reward_buf, src.reward_pos, horizon_cap)
        if status != K.STATUS_REFILL:
            break
        src.refill_exhausted()
    state.t = int(acc[0])
    state.pseudo_regret = float(acc[1])
    state.realized_regret = float(acc[2])
    return _result(state, int(acc[3]), censored=status == K.STATUS_CENSORED)


def _check_cap(instance, horizon_cap):
    if horizon_cap < instance.n_arms:
        raise ConfigError(f"horizon cap {horizon_cap} is smaller than the number of arms")


def _source(seed, instance) -> RandomSource:
    if isinstance(seed, RandomSource):
        return seed
    return RandomSource(seed, instance.family, instance.means)


def pull_gaps(instance: BanditInstance, counts) -> float:
    return float(np.dot(gaps(instance), counts))
