"""
Monte Carlo campaigns
=====================

Seeded campaigns over algorithms and confidence levels, the ratio table and
the command-line equivalent.
"""

# %%
from dklucb import BanditInstance, ExperimentConfig, RewardFamily, hardness_i_star, ratio_table, run_campaign

inst = BanditInstance(RewardFamily.bernoulli(), (0.6, 0.4))
cfg = ExperimentConfig(inst, ["dkl_ucb", "uniform_stop"], [0.1, 0.01, 0.001], trials_per_cell=50, base_seed=1)
stats = run_campaign(cfg)

# %%
for (alg, delta), cell in stats.cells.items():
    print(f"{alg:13s} delta={delta:<6g} tau={cell.tau.mean:8.1f} regret={cell.pseudo_regret.mean:7.1f} "
          f"errors={cell.errors} ub99={cell.error_ub99:.3f}")

# %% [markdown]
# Regret per log(1/delta), against I*, and stopping time per log(1/delta).

# %%
print("I* =", hardness_i_star(inst))
for row in ratio_table(stats):
    print(row)

# %% [markdown]
# The same campaign from the shell writes a CSV with one row per cell:
#
#     python -m dklucb run --config configs/acceptance.json --out results.csv
#     python -m dklucb oracle --config configs/gaussian_oracle.json
#     python -m dklucb validate --suite gamma
