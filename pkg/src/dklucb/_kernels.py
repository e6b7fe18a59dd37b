"""Compiled scalar kernels shared by the step-by-step and the batched trial paths.

Everything here works on plain floats/ints and numpy arrays so numba can
compile it. Family kinds and sampling rules are passed as small integer codes.
"""

import math

import numpy as np
from numba import njit

BERNOULLI = 0
GAUSSIAN = 1
POISSON = 2
EXPONENTIAL = 3

RULE_DKL = 0
RULE_KLUCB = 1
RULE_UNIFORM = 2

SCHEDULE_3LOG = 0
SCHEDULE_LOG_LOGLOG = 1

KL_TOL = 1e-9
MAX_ITER = 200

STATUS_REFILL = 0
STATUS_STOPPED = 1
STATUS_CENSORED = 2


@njit(cache=True)
def kl_scalar(kind, variance, p, q):
    if p == q:
        return 0.0
    if kind == GAUSSIAN:
        d = p - q
        return d * d / (2.0 * variance)
    if kind == BERNOULLI:
        if q <= 0.0 or q >= 1.0:
            return math.inf
        out = 0.0
        if p > 0.0:
            out += p * math.log(p / q)
        if p < 1.0:
            out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
        return max(out, 0.0)
    if kind == POISSON:
        if q <= 0.0:
            return math.inf
        if p <= 0.0:
            return q
        return max(p * math.log(p / q) + q - p, 0.0)
    # exponential, parameterized by its mean
    if q <= 0.0:
        return math.inf
    r = p / q
    return max(r - 1.0 - math.log(r), 0.0)


@njit(cache=True)
def upper_inverse(kind, variance, mu, c):
    if c <= 0.0:
        return mu
    if kind == GAUSSIAN:
        return mu + math.sqrt(2.0 * variance * c)
    lo = mu
    if kind == BERNOULLI:
        if mu >= 1.0:
            return 1.0
        hi = 1.0
    else:
        off = max(mu, 1.0)
        hi = mu + off
        while kl_scalar(kind, variance, mu, hi) <= c:
            off *= 2.0
            hi = mu + off
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        d = kl_scalar(kind, variance, mu, mid)
        if abs(d - c) <= KL_TOL:
            return mid
        if d > c:
            hi = mid
        else:
            lo = mid
    if kind == BERNOULLI and hi == 1.0:
        # Root closer to 1 than float resolution: report the endpoint.
        return 1.0
    return lo


@njit(cache=True)
def lower_inverse(kind, variance, mu, c):
    if c <= 0.0:
        return mu
    if kind == GAUSSIAN:
        return mu - math.sqrt(2.0 * variance * c)
    hi = mu
    if mu <= 0.0:
        return 0.0
    lo = 0.0
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        d = kl_scalar(kind, variance, mu, mid)
        if abs(d - c) <= KL_TOL:
            return mid
        if d > c:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        return 0.0
    return hi


@njit(cache=True)
def f_value(schedule, t):
    lt = math.log(t)
    if schedule == SCHEDULE_3LOG:
        return 3.0 * lt
    if t <= 1.0:
        return 0.0
    return lt + math.log(lt) if lt > 1.0 else lt


@njit(cache=True)
def g_value(delta, t, k):
    return math.log(2.0 * k * t * t / delta)


@njit(cache=True)
def compute_indices(kind, variance, counts, sums, f_t, g_t, uf, ug, lg):
    for i in range(counts.shape[0]):
        n = counts[i]
        mu = sums[i] / n
        uf[i] = upper_inverse(kind, variance, mu, f_t / n)
        ug[i] = upper_inverse(kind, variance, mu, g_t / n)
        lg[i] = lower_inverse(kind, variance, mu, g_t / n)


@njit(cache=True)
def candidates(uf, ug):
    k = uf.shape[0]
    af = 0
    for i in range(1, k):
        if uf[i] > uf[af]:
            af = i
    ag = -1
    for i in range(k):
        if i == af:
            continue
        if ag < 0 or ug[i] > ug[ag]:
            ag = i
    return af, ag


@njit(cache=True)
def run_block(kind, variance, rule, schedule, beta, delta, counts, sums, acc,
              means, coin_buf, coin_pos, reward_buf, reward_pos, horizon_cap):
    """Advance one trial until it stops, hits the cap, or a buffer runs dry.

    ``acc`` holds [t, pseudo_regret, realized_regret, recommendation].
    ``coin_pos`` and ``reward_pos`` are updated in place.
    """
    k = counts.shape[0]
    mu_best = means.max()
    uf = np.empty(k)
    ug = np.empty(k)
    lg = np.empty(k)
    while True:
        t = int(acc[0])
        if t >= horizon_cap:
            f_t = f_value(schedule, t + 1.0)
            g_t = g_value(delta, t + 1.0, k)
            compute_indices(kind, variance, counts, sums, f_t, g_t, uf, ug, lg)
            af, ag = candidates(uf, ug)
            acc[3] = af
            return STATUS_CENSORED
        step_t = t + 1.0
        compute_indices(kind, variance, counts, sums, f_value(schedule, step_t),
                        g_value(delta, step_t, k), uf, ug, lg)
        af, ag = candidates(uf, ug)
        if lg[af] > ug[ag]:
            acc[3] = af
            return STATUS_STOPPED
        use_coin = rule == RULE_DKL
        if use_coin:
            if coin_pos[0] >= coin_buf.shape[0]:
                return STATUS_REFILL
            arm = af if coin_buf[coin_pos[0]] < beta else ag
        elif rule == RULE_KLUCB:
            arm = af
        else:
            arm = t % k
        if reward_pos[arm] >= reward_buf.shape[1]:
            return STATUS_REFILL
        if use_coin:
            coin_pos[0] += 1
        x = reward_buf[arm, reward_pos[arm]]
        reward_pos[arm] += 1
        counts[arm] += 1
        sums[arm] += x
        acc[0] = t + 1
        acc[1] += mu_best - means[arm]
        acc[2] += mu_best - x


@njit(cache=True)
def upper_inverse_array(kind, variance, mu, c):
    out = np.empty(mu.shape[0])
    for i in range(mu.shape[0]):
        out[i] = upper_inverse(kind, variance, mu[i], c[i])
    return out


@njit(cache=True)
def lower_inverse_array(kind, variance, mu, c):
    out = np.empty(mu.shape[0])
    for i in range(mu.shape[0]):
        out[i] = lower_inverse(kind, variance, mu[i], c[i])
    return out
