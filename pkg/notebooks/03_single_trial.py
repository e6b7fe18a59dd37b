"""
One trial, round by round
=========================

Runs Double KL-UCB step by step on a two-armed Bernoulli problem, shows the
candidate pair and the confidence bounds, then replays the stopping test
from the raw pull history.
"""

# %%
import numpy as np

from dklucb import BanditInstance, RewardFamily, coin_bias, run, run_stepwise
from dklucb.validation import replay_trace, trace_trial

inst = BanditInstance(RewardFamily.bernoulli(), (0.7, 0.3))
delta = 0.05
print("coin bias:", coin_bias(delta))

# %%
records = trace_trial(inst, delta, seed=1, horizon_cap=10**6)
pulls = [r for r in records if r["event"] == "pull"]
for r in pulls[:5] + pulls[-3:]:
    print(r["t"], "A_f", r["a_f"], "A_g", r["a_g"], "pulled", r["arm"],
          "L_g(A_f)=%.3f U_g(A_g)=%.3f" % (r["g_lower"][r["a_f"]], r["g_upper"][r["a_g"]]))
print(records[-1])

# %% [markdown]
# Independent recomputation of every stopping decision.

# %%
print(replay_trace(records, inst.family, delta, inst.n_arms))

# %% [markdown]
# The compiled loop gives the same trial as the round-by-round reference.

# %%
print(run(inst, delta, 1))
print(run_stepwise(inst, delta, 1))

# %% [markdown]
# Stopping time and recommendation over a few seeds.

# %%
results = [run(inst, delta, [5, i]) for i in range(200)]
print("mean tau:", np.mean([r.tau for r in results]), "errors:", sum(not r.correct for r in results))
