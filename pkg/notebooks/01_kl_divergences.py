"""
KL divergences and confidence bounds
====================================

Every index the algorithm uses is a KL inversion: the largest (or smallest)
mean whose divergence from the empirical mean fits a budget. This script
walks through the four supported families.
"""

# %%
import numpy as np

from dklucb import RewardFamily, kl, kl_bernoulli, kl_lower_inverse, kl_upper_inverse, variance_bound

families = {
    "bernoulli": RewardFamily.bernoulli(),
    "gaussian(1)": RewardFamily.gaussian(1.0),
    "poisson": RewardFamily.poisson(),
    "exponential": RewardFamily.exponential(),
}

# %% [markdown]
# Divergence from a fixed mean grows on both sides and is not symmetric
# except in the Gaussian case.

# %%
for name, fam in families.items():
    mu = 0.4 if name == "bernoulli" else 1.0
    others = np.array([mu * 0.5, mu * 1.5])
    print(f"{name:12s} kl({mu}, {others}) = {kl(fam, mu, others)}")

print("kl_B(0.1, 0.9) =", kl_bernoulli(0.1, 0.9), " 0.8 ln 9 =", 0.8 * np.log(9))

# %% [markdown]
# Upper and lower bounds for an empirical mean of 0.4 after n pulls, with the
# budget log(1000)/n. They shrink roughly like 1/sqrt(n).

# %%
ber = families["bernoulli"]
for n in (10, 100, 1000, 10000):
    c = np.log(1000) / n
    print(f"n={n:5d}  [{kl_lower_inverse(ber, 0.4, c):.4f}, {kl_upper_inverse(ber, 0.4, c):.4f}]")

# %% [markdown]
# Round trip on random inputs, vectorized.

# %%
rng = np.random.default_rng(0)
mu = rng.uniform(0.05, 0.95, 5)
c = rng.uniform(0, 1, 5)
up = kl_upper_inverse(ber, mu, c)
print("kl(mu, U) - c =", kl(ber, mu, up) - c)

# %% [markdown]
# The quadratic lower bound kl >= (mu - mu')^2 / (2V), with V the largest
# variance between the two means.

# %%
p, q = 0.2, 0.7
print(kl(ber, p, q), ">=", (p - q) ** 2 / (2 * variance_bound(ber, p, q)))
