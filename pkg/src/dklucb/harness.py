"""Seeded Monte Carlo campaigns over (algorithm, delta) cells.

Trial ``i`` of cell ``(algorithm, delta_index)`` draws its randomness from
``numpy.random.SeedSequence([base_seed, algorithm_id, delta_index, i])``. The
sequence hashes its entropy words into independent streams, so every trial is
reproducible on its own and results do not depend on how trials are spread
over worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from .algorithm import DEFAULT_HORIZON_CAP, TrialResult, run
from .errors import ConfigError
from .families import kl_bernoulli
from .oracles import BanditInstance, hardness_i_star

ALGORITHMS = ("dkl_ucb", "klucb_stop", "uniform_stop")
ALGORITHM_IDS = {name: i for i, name in enumerate(ALGORITHMS)}


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    algorithms: tuple[str, ...]
    delta_grid: tuple[float, ...]
    trials_per_cell: int
    base_seed: int = 0
    horizon_cap: int = DEFAULT_HORIZON_CAP
    parallelism: int = 1

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for name in self.algorithms:
            if name not in ALGORITHM_IDS:
                raise ConfigError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("algorithms must be distinct")
        if not self.delta_grid:
            raise ConfigError("delta grid is empty")
        if any(not 0.0 < d < 1.0 for d in self.delta_grid):
            raise ConfigError("every delta must lie strictly inside (0, 1)")
        if len(set(self.delta_grid)) != len(self.delta_grid):
            raise ConfigError("delta values must be distinct")
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be a 64-bit unsigned integer")
        if self.horizon_cap < self.instance.n_arms:
            raise ConfigError("horizon_cap must be at least the number of arms")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")


class RunningStats:
    """Single-pass mean/variance (Welford) with Chan's pairwise merge."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, x: float):
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    def merge(self, other: RunningStats) -> RunningStats:
        out = RunningStats()
        out.n = self.n + other.n
        if out.n == 0:
            return out
        d = other.mean - self.mean
        out.mean = self.mean + d * other.n / out.n
        out.m2 = self.m2 + other.m2 + d * d * self.n * other.n / out.n
        return out

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0


def clopper_pearson_upper(errors: int, n: int, confidence: float = 0.99) -> float:
    """Upper end of the two-sided Clopper-Pearson interval for a binomial rate."""
    if errors >= n:
        return 1.0
    return float(beta_dist.ppf(1.0 - (1.0 - confidence) / 2.0, errors + 1, n - errors))


@dataclass
class CellStats:
    algorithm: str
    delta: float
    pseudo_regret: RunningStats = field(default_factory=RunningStats)
    realized_regret: RunningStats = field(default_factory=RunningStats)
    tau: RunningStats = field(default_factory=RunningStats)
    errors: int = 0
    censored: int = 0

    def push(self, r: TrialResult):
        self.pseudo_regret.push(r.pseudo_regret)
        self.realized_regret.push(r.realized_regret)
        self.tau.push(float(r.tau))
        self.errors += int(not r.correct)
        self.censored += int(r.censored)

    @property
    def trials(self) -> int:
        return self.tau.n

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def error_ub99(self) -> float:
        return clopper_pearson_upper(self.errors, self.trials)

    @property
    def tau_loglog_ratio(self) -> float:
        li = math.log(1.0 / self.delta)
        ll = math.log(li)
        return self.tau.mean / (li * ll * ll) if ll > 0 else math.inf


@dataclass
class AggregateStats:
    config: ExperimentConfig
    cells: dict[tuple[str, float], CellStats]

    def cell(self, algorithm: str, delta: float) -> CellStats:
        return self.cells[(algorithm, float(delta))]


def trial_seed(base_seed: int, algorithm: str, delta_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, ALGORITHM_IDS[algorithm], delta_index, trial])


def _run_trial(args):
    instance, algorithm, delta, delta_index, trial, base_seed, cap = args
    return run(instance, delta, trial_seed(base_seed, algorithm, delta_index, trial), cap, rule=algorithm)


def _tasks(config: ExperimentConfig):
    for algorithm in config.algorithms:
        for di, delta in enumerate(config.delta_grid):
            for i in range(config.trials_per_cell):
                yield (config.instance, algorithm, delta, di, i, config.base_seed, config.horizon_cap)


def effective_parallelism(config: ExperimentConfig) -> int:
    env = os.environ.get("BAI_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"BAI_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError("BAI_THREADS must be >= 1")
        return n
    return config.parallelism


def run_campaign(config: ExperimentConfig, parallelism: int | None = None) -> AggregateStats:
    """Run every trial of every cell and aggregate in a fixed order.

    Results are reduced in task order whatever the worker count, so the
    aggregate is bit-identical for any ``parallelism``.
    """
    workers = parallelism or effective_parallelism(config)
    tasks = list(_tasks(config))
    if workers == 1:
        results = [_run_trial(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=chunk))
    cells = {}
    for task, res in zip(tasks, results):
        key = (task[1], task[2])
        if key not in cells:
            cells[key] = CellStats(task[1], task[2])
        cells[key].push(res)
    return AggregateStats(config, cells)


@dataclass(frozen=True)
class RatioRow:
    algorithm: str
    delta: float
    regret_ratio: float
    regret_lb_ratio: float
    tau_ratio: float


def ratio_table(stats: AggregateStats, i_star: float | None = None) -> list[RatioRow]:
    """Finite-delta ratios against log(1/delta) and against the regret lower bound.

    ``regret_lb_ratio`` is ``inf`` where the lower bound vanishes (delta = 1/2).
    """
    instance = stats.config.instance
    if i_star is None:
        i_star = hardness_i_star(instance)
    rows = []
    for (algorithm, delta), cell in stats.cells.items():
        li = math.log(1.0 / delta)
        lb = i_star * kl_bernoulli(delta, 1.0 - delta)
        rows.append(RatioRow(
            algorithm=algorithm,
            delta=delta,
            regret_ratio=cell.pseudo_regret.mean / li,
            regret_lb_ratio=cell.pseudo_regret.mean / lb if lb > 0 else math.inf,
            tau_ratio=cell.tau.mean / li,
        ))
    return rows
