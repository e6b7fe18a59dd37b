"""
Lower-bound oracles
===================

Closed-form and numerically solved constants that the simulations are
compared against: gaps, the hardness I*, the finite-delta regret lower
bound, the transport function phi and the sample-complexity constant Gamma*.
"""

# %%
import numpy as np

from dklucb import BanditInstance, RewardFamily, gamma_star, gaps, hardness_i_star, kl, phi, regret_lower_bound
from dklucb.oracles import sample_optimal_regret_ratio, transport_values

ber = RewardFamily.bernoulli()
two = BanditInstance(ber, (0.6, 0.4))
three = BanditInstance(ber, (0.5, 0.4, 0.3))

# %%
print("gaps:", gaps(two), gaps(three))
print("I*:", hardness_i_star(two), hardness_i_star(three))
for d in (0.1, 0.01, 1e-3, 1e-4):
    print(f"regret lower bound at delta={d:g}: {regret_lower_bound(two, d):.4f}")

# %% [markdown]
# phi(x, y) is the cheapest way to make arm j look as good as arm 1 when they
# were sampled in proportions x and y. The minimizing mean is their weighted
# average.

# %%
value, lam = phi(1.0, 1.0, 0.6, 0.4, ber)
grid = np.linspace(0.01, 0.99, 99)
print(value, lam, "grid minimum:", np.min(kl(ber, 0.6, grid) + kl(ber, 0.4, grid)))

# %% [markdown]
# Gamma* and its optimal weights. At the optimum the transport cost is the
# same for every challenger.

# %%
opt = gamma_star(three)
print("Gamma* =", opt.value, "w =", opt.w)
print("transport costs:", transport_values(three, opt.w), "1/Gamma* =", 1 / opt.value)

gauss = gamma_star(BanditInstance(RewardFamily.gaussian(1.0), (1.0, 0.0)))
print("two Gaussians, gap 1:", gauss.value, gauss.w)

# %% [markdown]
# For the symmetric pair (1 - mu, mu) the sample-optimal allocation is
# uniform, and its regret coefficient exceeds I* by
# kl_B(mu, 1 - mu) / (2 kl_B(mu, 1/2)).

# %%
for mu in (0.1, 0.3, 0.45):
    inst = BanditInstance(ber, (1 - mu, mu))
    print(f"mu={mu}: w={gamma_star(inst).w.round(6)}, regret ratio={sample_optimal_regret_ratio(inst):.4f}")
