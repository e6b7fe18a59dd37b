"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``[PASS]`` or ``[FAIL]`` line (also visible without
``-s``) before asserting. Monte Carlo cells are shared through module-scoped
fixtures so each campaign runs once.
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from dklucb import BanditInstance, ExperimentConfig, RewardFamily, gamma_star, kl_bernoulli, run_campaign
from dklucb import hardness_i_star, regret_lower_bound
from dklucb.validation import (check_inversion, check_kl, check_pinsker, replay_trace, simplex_grid_gamma,
                               trace_trial)

ROOT = Path(__file__).resolve().parents[1]
BER = RewardFamily.bernoulli()
INSTANCE = BanditInstance(BER, (0.6, 0.4))
I_STAR = 2.46630346237643  # mpmath: 0.2 / kl_B(0.4, 0.6)
GRID = (1e-1, 1e-2, 1e-3, 1e-4)
CAP = 10**7


@pytest.fixture
def report(capsys):
    def emit(criterion: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def grid_stats():
    cfg = ExperimentConfig(INSTANCE, ["dkl_ucb"], GRID, 500, base_seed=6060, horizon_cap=CAP)
    return run_campaign(cfg)


@pytest.fixture(scope="module")
def strawman_stats():
    cfg = ExperimentConfig(INSTANCE, ["dkl_ucb", "klucb_stop"], (0.1, 0.02), 300, base_seed=8080, horizon_cap=CAP)
    return run_campaign(cfg)


def test_c1_kl_correctness(report):
    start = time.perf_counter()
    problems = []
    for check in (check_kl, check_pinsker):
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - reported below
            problems.append(f"{check.__name__}: {exc}")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 1.0
    report("C1 KL correctness", ok, f"10^4 pairs x 5 families, {elapsed:.2f} s (< 1 s) {problems or ''}")
    assert ok


def test_c2_inversion_round_trip(report):
    start = time.perf_counter()
    try:
        check_inversion()
        problem = ""
    except Exception as exc:  # noqa: BLE001
        problem = str(exc)
    elapsed = time.perf_counter() - start
    ok = not problem and elapsed < 5.0
    report("C2 inversion round trip", ok, f"|kl - c| <= 1e-9 and L <= mu <= U, {elapsed:.2f} s (< 5 s) {problem}")
    assert ok


def test_c3_gamma_oracle(report):
    start = time.perf_counter()
    gauss = gamma_star(BanditInstance(RewardFamily.gaussian(1.0), (1.0, 0.0)))
    sym = gamma_star(BanditInstance(BER, (0.7, 0.3)))
    three = BanditInstance(BER, (0.5, 0.4, 0.3))
    g3 = gamma_star(three).value
    brute = simplex_grid_gamma(three, 1e-3)
    elapsed = time.perf_counter() - start
    checks = {
        "gauss value": abs(gauss.value - 8.0) <= 1e-6,
        "gauss w": np.all(np.abs(gauss.w - 0.5) <= 1e-6),
        "symmetric w": np.all(np.abs(sym.w - 0.5) <= 1e-4),
        "K=3 grid": abs(g3 - brute) / brute <= 1e-3,
        "runtime": elapsed < 30.0,
    }
    ok = all(checks.values())
    report("C3 Gamma* oracle", ok, f"Gamma*={gauss.value:.9f}, sym w={sym.w.round(6).tolist()}, "
                                   f"K=3 {g3:.6f} vs grid {brute:.6f}, {elapsed:.1f} s; {checks}")
    assert ok


def test_c4_delta_pac(report):
    cfg = ExperimentConfig(INSTANCE, ["dkl_ucb"], [0.1], 2000, base_seed=4040, horizon_cap=CAP)
    cell = run_campaign(cfg).cell("dkl_ucb", 0.1)
    ok = cell.error_rate <= 0.1 and cell.censored == 0 and cell.trials == 2000
    report("C4 delta-PAC", ok, f"error rate {cell.error_rate:.4f} (<= 0.1), 99% Clopper-Pearson upper "
                               f"{cell.error_ub99:.4f}, censored {cell.censored}/2000")
    assert ok


def test_c5_regret_lower_bound(report, grid_stats):
    parts, ok = [], True
    for d in GRID:
        cell = grid_stats.cell("dkl_ucb", d)
        bound = 0.9 * regret_lower_bound(INSTANCE, d)
        ok &= cell.pseudo_regret.mean >= bound
        parts.append(f"d={d:g}: {cell.pseudo_regret.mean:.1f} >= {bound:.2f}")
    report("C5 regret lower bound", ok, "; ".join(parts))
    assert ok


def test_c6_regret_ratio_trend(report, grid_stats):
    assert hardness_i_star(INSTANCE) == pytest.approx(I_STAR, rel=1e-12)
    ratios = [grid_stats.cell("dkl_ucb", d).pseudo_regret.mean / math.log(1 / d) for d in GRID]
    nonincreasing = all(b <= a for a, b in zip(ratios, ratios[1:]))
    last = ratios[-1]
    in_band = 0.5 * I_STAR <= last <= 2.5 * I_STAR
    ok = nonincreasing and in_band
    report("C6 regret optimality trend", ok,
           f"regret/ln(1/d) = {[round(r, 3) for r in ratios]}, nonincreasing={nonincreasing}; "
           f"at 1e-4 {last:.3f} = {last / I_STAR:.2f} I*, band [{0.5 * I_STAR:.3f}, {2.5 * I_STAR:.3f}] -> {in_band}")
    assert ok


def test_c7_sample_complexity_growth(report, grid_stats):
    ratios = [grid_stats.cell("dkl_ucb", d).tau.mean / math.log(1 / d) for d in GRID]
    ok = all(b > a for a, b in zip(ratios, ratios[1:]))
    report("C7 sample-complexity growth", ok, f"tau/ln(1/d) = {[round(r, 1) for r in ratios]} (must increase)")
    assert ok


def test_c8_strawman_separation(report, strawman_stats):
    def factor(alg):
        return strawman_stats.cell(alg, 0.02).tau.mean / strawman_stats.cell(alg, 0.1).tau.mean
    straw, dkl = factor("klucb_stop"), factor("dkl_ucb")
    censored = sum(c.censored for c in strawman_stats.cells.values())
    ok = straw >= 3.0 and dkl <= 2.0
    report("C8 strawman separation", ok, f"KL-UCB+stop tau(0.02)/tau(0.1) = {straw:.3f} (>= 3), "
                                         f"DKL-UCB = {dkl:.3f} (<= 2), censored {censored}")
    assert ok


def test_c9_stopping_replay(report):
    start = time.perf_counter()
    cases = [
        (BanditInstance(BER, (0.7, 0.3)), 0.1),
        (BanditInstance(BER, (0.8, 0.5, 0.3)), 0.05),
        (BanditInstance(RewardFamily.gaussian(1.0), (1.0, 0.0, -0.5)), 0.1),
        (BanditInstance(RewardFamily.poisson(), (3.0, 1.5)), 0.1),
        (BanditInstance(RewardFamily.exponential(), (1.0, 3.0)), 0.1),
    ]
    rules = ["dkl_ucb", "klucb_stop", "uniform_stop"]
    traces = checked = ambiguous = 0
    failures = []
    i = 0
    while traces < 100:
        inst, delta = cases[i % len(cases)]
        rule = rules[(i // len(cases)) % len(rules)]
        recs = trace_trial(inst, delta, [9090, i], CAP, rule=rule)
        rep = replay_trace(recs, inst.family, delta, inst.n_arms)
        checked += rep.checked
        ambiguous += rep.ambiguous
        if not rep.ok:
            failures.append((rule, inst.means, rep))
        traces += 1
        i += 1
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60.0
    report("C9 stopping soundness replay", ok, f"{traces} traces, {checked} decisions recomputed, "
                                               f"{ambiguous} within 1e-7, failures {failures[:3]}, {elapsed:.1f} s (< 60 s)")
    assert ok


def test_c10_determinism(report, tmp_path):
    outputs = []
    for threads in ("1", "8"):
        out = tmp_path / f"acceptance_{threads}.csv"
        env = {**os.environ, "BAI_THREADS": threads}
        proc = subprocess.run([sys.executable, "-m", "dklucb", "run", "--config", str(ROOT / "configs" / "acceptance.json"),
                               "--out", str(out)], env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1]
    report("C10 determinism", ok, f"parallelism 1 vs 8: {len(outputs[0])} bytes, identical={ok}")
    assert ok


def test_lower_bound_constant():
    # Sanity anchor for C5: I* kl_B(0.1, 0.9).
    assert I_STAR * kl_bernoulli(0.1, 0.9) == pytest.approx(4.33521806616233, rel=1e-12)
