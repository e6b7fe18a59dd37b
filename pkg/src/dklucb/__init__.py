"""Best-arm identification with minimal regret: Double KL-UCB, baselines, oracles and a Monte Carlo harness."""

__version__ = "0.1.0"

from .algorithm import coin_bias, f_exploration, g_exploration, run, run_stepwise, step
from .baselines import run_klucb_stop, run_uniform_stop
from .errors import ConfigError, ConvergenceError, DomainError
from .families import (RewardFamily, kl, kl_bernoulli, kl_lower_inverse, kl_upper_inverse, sample,
                       variance_bound)
from .harness import ExperimentConfig, ratio_table, run_campaign
from .oracles import BanditInstance, OptimalWeights, gamma_star, gaps, hardness_i_star, phi, regret_lower_bound

__all__ = [
    "BanditInstance", "ConfigError", "ConvergenceError", "DomainError", "ExperimentConfig",
    "OptimalWeights", "RewardFamily", "coin_bias", "f_exploration", "g_exploration", "gamma_star",
    "gaps", "hardness_i_star", "kl", "kl_bernoulli", "kl_lower_inverse", "kl_upper_inverse", "phi",
    "ratio_table", "regret_lower_bound", "run", "run_campaign", "run_klucb_stop", "run_stepwise",
    "run_uniform_stop", "sample", "step", "variance_bound",
]
