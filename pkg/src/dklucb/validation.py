"""Property suites behind ``dklucb validate`` and the stopping-rule replay.

Each suite takes the KL function under test as a parameter so that a
deliberately broken implementation can be fed in as a negative control.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algorithm import g_exploration, run_stepwise
from .errors import DomainError
from .families import Kind, RewardFamily, kl, kl_lower_inverse, kl_upper_inverse, variance_bound
from .oracles import BanditInstance, gamma_star, phi, transport_values

FAMILIES = (
    RewardFamily.bernoulli(),
    RewardFamily.gaussian(1.0),
    RewardFamily.gaussian(2.5),
    RewardFamily.poisson(),
    RewardFamily.exponential(),
)

# Sampling ranges for random means; wide enough to reach near-boundary regimes.
_RANGES = {
    Kind.BERNOULLI: (1e-3, 1 - 1e-3),
    Kind.GAUSSIAN: (-5.0, 5.0),
    Kind.POISSON: (1e-2, 20.0),
    Kind.EXPONENTIAL: (1e-2, 20.0),
}


class SuiteFailure(AssertionError):
    pass


def random_means(family: RewardFamily, rng: np.random.Generator, size: int) -> np.ndarray:
    lo, hi = _RANGES[family.kind]
    return rng.uniform(lo, hi, size)


def check_kl(kl_fn=kl, n: int = 10_000, seed: int = 1):
    rng = np.random.default_rng(seed)
    for fam in FAMILIES:
        p = random_means(fam, rng, n)
        q = random_means(fam, rng, n)
        d = np.asarray(kl_fn(fam, p, q))
        if np.any(d < 0):
            raise SuiteFailure(f"{fam.kind.value}: negative divergence")
        same = np.asarray(kl_fn(fam, p, p))
        if np.any(np.abs(same) > 1e-12):
            raise SuiteFailure(f"{fam.kind.value}: kl(mu, mu) != 0")
        if np.any(d[p != q] <= 0):
            raise SuiteFailure(f"{fam.kind.value}: kl vanishes for distinct means")


def _hull_variance(fam: RewardFamily, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    lo, hi = np.minimum(p, q), np.maximum(p, q)
    return np.array([variance_bound(fam, a, b) for a, b in zip(lo, hi)])


def check_pinsker(kl_fn=kl, n: int = 10_000, seed: int = 2):
    """kl(mu, mu') >= (mu - mu')^2 / (2 V) with V the largest variance between them."""
    rng = np.random.default_rng(seed)
    for fam in FAMILIES:
        p = random_means(fam, rng, n)
        q = random_means(fam, rng, n)
        keep = p != q
        p, q = p[keep], q[keep]
        v = _hull_variance(fam, p, q)
        bound = (p - q) ** 2 / (2 * v)
        d = np.asarray(kl_fn(fam, p, q))
        bad = d < bound * (1 - 1e-12)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise SuiteFailure(f"{fam.kind.value}: kl({p[i]}, {q[i]}) = {d[i]} below {bound[i]}")


def check_inversion(kl_fn=kl, n: int = 10_000, seed: int = 3):
    rng = np.random.default_rng(seed)
    for fam in FAMILIES:
        mus = random_means(fam, rng, n)
        cs = rng.uniform(0, 5, n)
        up = kl_upper_inverse(fam, mus, cs)
        lo = kl_lower_inverse(fam, mus, cs)
        if np.any(lo > mus) or np.any(mus > up):
            raise SuiteFailure(f"{fam.kind.value}: lower <= mean <= upper violated")
        for root in (up, lo):
            ok = _interior(fam, root)
            err = np.abs(np.asarray(kl_fn(fam, mus[ok], root[ok])) - cs[ok])
            if np.any(err > 1e-9):
                i = int(np.argmax(err))
                raise SuiteFailure(f"{fam.kind.value}: |kl - c| = {err[i]:g} at mu={mus[ok][i]}, c={cs[ok][i]}")


def _interior(fam: RewardFamily, x, margin: float = 1e-6):
    # Closer to a finite boundary the kl slope times one ulp exceeds 1e-9.
    lo, hi = fam.interval
    return (x - lo > margin) & (hi - x > margin)


def check_phi(seed: int = 4):
    """Closed-form argmin of phi beats a fine grid over lambda."""
    rng = np.random.default_rng(seed)
    fam = RewardFamily.bernoulli()
    grid = np.linspace(1e-3, 1 - 1e-3, 9999)
    for _ in range(200):
        a, b = np.sort(rng.uniform(0.02, 0.98, 2))[::-1]
        if a - b < 1e-3:
            continue
        x, y = rng.uniform(0, 5, 2)
        value, lam = phi(x, y, a, b, fam)
        brute = np.min(x * kl(fam, a, grid) + y * kl(fam, b, grid))
        if value > brute + 1e-12:
            raise SuiteFailure(f"phi({x}, {y}; {a}, {b}) = {value} exceeds grid minimum {brute}")


def simplex_grid_gamma(instance: BanditInstance, step: float = 1e-3) -> float:
    """Brute-force Gamma* for K = 3 over a regular simplex grid."""
    if instance.n_arms != 3:
        raise DomainError("grid oracle supports three arms only")
    fam = instance.family
    m = instance.canonical_means
    n = int(round(1 / step))
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = i + j <= n
    w1, w2 = i[keep] * step, j[keep] * step
    w3 = np.clip(1.0 - w1 - w2, 0.0, None)
    vals = []
    for wj, muj in ((w2, m[1]), (w3, m[2])):
        tot = w1 + wj
        safe = np.where(tot > 0, tot, 1.0)
        lam = (w1 * m[0] + wj * muj) / safe
        lam = np.clip(lam, muj, m[0])
        v = w1 * kl(fam, m[0], lam) + wj * kl(fam, muj, lam)
        vals.append(np.where(tot > 0, v, 0.0))
    best = float(np.max(np.minimum(vals[0], vals[1])))
    return 1.0 / best


def check_gamma():
    g = gamma_star(BanditInstance(RewardFamily.gaussian(1.0), (1.0, 0.0)))
    if abs(g.value - 8.0) > 1e-6 or np.max(np.abs(g.w - 0.5)) > 1e-6:
        raise SuiteFailure(f"two-arm Gaussian: got {g}")
    g = gamma_star(BanditInstance(RewardFamily.bernoulli(), (0.7, 0.3)))
    if np.max(np.abs(g.w - 0.5)) > 1e-4:
        raise SuiteFailure(f"symmetric Bernoulli weights not uniform: {g.w}")
    inst = BanditInstance(RewardFamily.bernoulli(), (0.5, 0.4, 0.3))
    g = gamma_star(inst)
    brute = simplex_grid_gamma(inst)
    if abs(g.value - brute) / brute > 1e-3:
        raise SuiteFailure(f"K=3 Gamma* {g.value} vs grid {brute}")
    tv = transport_values(inst, g.w)
    if abs(tv.min() - 1 / g.value) * g.value > 1e-6 or (tv.max() - tv.min()) / tv.min() > 1e-4:
        raise SuiteFailure(f"transport values not equalized: {tv}")


# --- stopping-rule replay -------------------------------------------------

def _kl_vec(fam: RewardFamily, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    kind = fam.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is Kind.GAUSSIAN:
            return (p - q) ** 2 / (2 * fam.variance)
        if kind is Kind.BERNOULLI:
            a = np.where(p > 0, p * np.log(np.where(p > 0, p, 1) / q), 0.0)
            b = np.where(p < 1, (1 - p) * np.log(np.where(p < 1, 1 - p, 1) / (1 - q)), 0.0)
            return np.where((q <= 0) | (q >= 1), np.inf, a + b)
        if kind is Kind.POISSON:
            a = np.where(p > 0, p * np.log(np.where(p > 0, p, 1) / q), 0.0)
            return np.where(q <= 0, np.inf, a + q - p)
        r = p / q
        return np.where(q <= 0, np.inf, r - 1 - np.log(r))


def bisect_bounds(fam: RewardFamily, mu: np.ndarray, c: np.ndarray, upper: bool) -> np.ndarray:
    """Vectorized KL inversion to 1e-14 relative width, independent of the compiled kernel."""
    mu = np.asarray(mu, dtype=float)
    c = np.asarray(c, dtype=float)
    lo_end, hi_end = fam.interval
    if upper:
        lo = mu.copy()
        hi = np.where(np.isfinite(hi_end), hi_end, mu + np.maximum(np.abs(mu), 1.0))
        if not np.isfinite(hi_end):
            for _ in range(200):
                short = _kl_vec(fam, mu, hi) <= c
                if not short.any():
                    break
                hi = np.where(short, mu + 2 * (hi - mu), hi)
    else:
        hi = mu.copy()
        lo = np.where(np.isfinite(lo_end), lo_end, mu - np.maximum(np.abs(mu), 1.0))
        if not np.isfinite(lo_end):
            for _ in range(200):
                short = _kl_vec(fam, mu, lo) <= c
                if not short.any():
                    break
                lo = np.where(short, mu - 2 * (mu - lo), lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        inside = _kl_vec(fam, mu, mid) <= c
        if upper:
            lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
        else:
            lo, hi = np.where(inside, lo, mid), np.where(inside, mid, hi)
        if np.all(hi - lo <= 1e-14 * np.maximum(1.0, np.abs(mid))):
            break
    return lo if upper else hi


@dataclass
class ReplayReport:
    checked: int
    disagreements: int
    ambiguous: int
    stop_confirmed: bool

    @property
    def ok(self) -> bool:
        return self.disagreements == 0 and self.stop_confirmed


def replay_trace(records: list[dict], family: RewardFamily, delta: float, n_arms: int,
                 margin: float = 1e-7) -> ReplayReport:
    """Recompute the stopping test at every decision from the raw pull history.

    ``records`` is the per-round trace emitted by :func:`trace_trial`.
    Comparisons whose two sides differ by less than ``margin`` are counted as
    ambiguous rather than as disagreements.
    """
    counts = np.zeros(n_arms)
    sums = np.zeros(n_arms)
    mus, cs, leaders, rivals, decided = [], [], [], [], []
    for rec in records:
        if rec["event"] == "init":
            counts[rec["arm"]] += 1
            sums[rec["arm"]] += rec["reward"]
            continue
        if rec["event"] == "censor":
            break
        t = rec["t"]
        g = g_exploration(delta, t, n_arms)
        mus.append(sums / counts)
        cs.append(g / counts)
        leaders.append(rec["a_f"])
        rivals.append([i for i in range(n_arms) if i != rec["a_f"]])
        decided.append(rec["event"] == "stop")
        if rec["event"] == "pull":
            counts[rec["arm"]] += 1
            sums[rec["arm"]] += rec["reward"]
    if not mus:
        return ReplayReport(0, 0, 0, False)
    mu = np.array(mus)
    c = np.array(cs)
    up = bisect_bounds(family, mu.ravel(), c.ravel(), upper=True).reshape(mu.shape)
    low = bisect_bounds(family, mu.ravel(), c.ravel(), upper=False).reshape(mu.shape)
    rows = np.arange(len(leaders))
    lead = np.array(leaders)
    l_lead = low[rows, lead]
    up_masked = up.copy()
    up_masked[rows, lead] = -np.inf
    u_rival = up_masked.max(axis=1)
    verdict = l_lead > u_rival
    gap = np.abs(l_lead - u_rival)
    decided = np.array(decided)
    clear = gap >= margin
    disagreements = int(np.sum((verdict != decided) & clear))
    ambiguous = int(np.sum(~clear))
    stop_confirmed = bool(decided[-1] and (verdict[-1] or not clear[-1]))
    return ReplayReport(len(decided), disagreements, ambiguous, stop_confirmed)


def trace_trial(instance: BanditInstance, delta: float, seed, horizon_cap: int, rule: str = "dkl_ucb",
                schedule: str = "3log") -> list[dict]:
    """Run one trial step by step and return its per-round records.

    Record kinds: ``init`` (the K warm-up pulls), ``pull``, ``stop`` and
    ``censor``. ``t`` is the round being decided; indices are computed from
    the ``t - 1`` pulls before it.
    """
    records: list[dict] = []

    def on_init(state):
        for arm in range(instance.n_arms):
            records.append({"event": "init", "t": arm + 1, "arm": arm, "reward": float(state.sums[arm])})

    def on_step(state, out):
        ind = out.indices
        records.append({
            "event": "stop" if out.stopped else "pull",
            "t": int(state.t + 1 if out.stopped else state.t),
            "arm": out.pulled_arm,
            "reward": out.reward,
            "a_f": out.candidate_f,
            "a_g": out.candidate_g,
            "coin_heads": out.coin_heads,
            "recommendation": out.recommendation,
            "f_upper": ind.f_upper.tolist(),
            "g_upper": ind.g_upper.tolist(),
            "g_lower": ind.g_lower.tolist(),
        })

    result = run_stepwise(instance, delta, seed, horizon_cap, rule=rule, schedule=schedule,
                          on_step=on_step, on_init=on_init)
    if result.censored:
        records.append({"event": "censor", "t": result.tau + 1, "recommendation": result.recommendation})
    return records


SUITES: dict[str, Callable] = {
    "kl": check_kl,
    "pinsker": check_pinsker,
    "inversion": check_inversion,
    "phi": check_phi,
    "gamma": check_gamma,
}


def check_stopping(n_traces: int = 12, seed: int = 5):
    fam = RewardFamily.bernoulli()
    for inst, rule in itertools.product(
            [BanditInstance(fam, (0.7, 0.3)), BanditInstance(fam, (0.8, 0.5, 0.3))],
            ["dkl_ucb", "uniform_stop"]):
        for s in range(n_traces // 4):
            recs = trace_trial(inst, 0.1, [seed, s], 10**6, rule=rule)
            rep = replay_trace(recs, fam, 0.1, inst.n_arms)
            if not rep.ok:
                raise SuiteFailure(f"stopping replay failed for {rule} on {inst.means}: {rep}")


SUITES["stopping"] = check_stopping


def run_suites(names=None, kl_fn=kl, out=print) -> bool:
    names = list(SUITES) if not names else list(names)
    ok = True
    for name in names:
        fn = SUITES[name]
        start = time.perf_counter()
        try:
            if name in ("kl", "pinsker", "inversion"):
                fn(kl_fn=kl_fn)
            else:
                fn()
            status, detail = "PASS", ""
        except (SuiteFailure, DomainError, FloatingPointError, ValueError) as exc:
            ok = False
            status, detail = "FAIL", f": {exc}"
        out(f"{status} {name} ({time.perf_counter() - start:.2f} s){detail}")
    return ok
