"""Acceptance criteria; each test prints a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from contractsched import advisor, bounds, harness, querygames, sequences
from contractsched.sequences import MergedSequence, Schedule

from oracles import quadratic_roots


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    return emit


def test_01_optimal_base(report):
    start = time.perf_counter()
    g2 = sequences.acceleration_ratio(Schedule.geometric(2, horizon=60))
    errs = [abs(sequences.acceleration_ratio(Schedule.geometric(b)) - b * b / (b - 1))
            for b in np.linspace(1.2, 6, 50)]
    elapsed = time.perf_counter() - start
    ok = abs(g2 - 4) <= 1e-9 and max(errs) <= 1e-6 and elapsed < 1
    report(1, ok, f"G_2 ratio {g2:.15g}; max |ratio - b^2/(b-1)| over 50 bases {max(errs):.2e}; "
                  f"{elapsed:.2f}s")
    assert ok


def test_02_root_identities(report):
    start = time.perf_counter()
    worst = 0.0
    for r in np.linspace(4, 100, 100):
        z1, z2 = bounds.zeta_roots(r)
        worst = max(worst, abs(z1 * z2 - r), abs(z1 + z2 - r), abs((z2 - 1) * (z1 - 1) - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1
    report(2, ok, f"max identity residual over 100 r-values {worst:.2e}; {elapsed:.2f}s")
    assert ok


def test_03_pareto_sandwich(report):
    start = time.perf_counter()
    worst, bad = 0.0, []
    for k in range(4):
        for r in (4, 4.5, 5, 6):
            plan = advisor.build_pareto_schedule(r, k, horizon=200)
            run = harness.run_scenario(harness.SimulationConfig(
                "pareto", k=k, r=r, horizon=200, t_grid=2 * plan.family.exponents, fillers=0))
            gap = abs(run.max_ratio - bounds.pareto_consistency_lower_bound(r, k))
            worst = max(worst, gap)
            if gap > 1e-6:
                bad.append((k, r))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    report(3, ok, f"max |empirical consistency - lower bound| {worst:.2e} over 16 (k, r); "
                  f"{elapsed:.2f}s")
    assert ok, bad


def test_04_min_cyclic_exhaustive(report):
    start = time.perf_counter()
    bad, cases = [], 0
    for k in range(3, 9):
        for H in (0, 1, 2):
            if 2 * H > k:
                continue
            if 2 ** (k - H) // bounds.binomial_tail(k - H, H) < 1:
                continue
            cases += 1
            worst = querygames.exhaustive_min_cyclic(2 ** k, k, H)
            if worst > 2 ** H * bounds.binomial_tail(k - H, H):
                bad.append((k, H, worst))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 180
    report(4, ok, f"{cases} (k, H) cases, every answer sequence within 2^H*tail(k-H, H); "
                  f"{elapsed:.2f}s")
    assert ok, bad


def test_05_adversary_lower_bound(report):
    start = time.perf_counter()
    short = []
    for n in (8, 16, 32):
        for k in (3, 4, 5):
            for H in (0, 1):
                need = (n * bounds.binomial_tail(k, H)) >> k
                out = querygames.play_against_adversary(n, k, H)
                fails = int(out.forced_rank < need)
                for seed in range(1000):
                    fails += querygames.play_against_adversary(n, k, H, seed).forced_rank < need
                if fails:
                    short.append(f"n={n},k={k},H={H} ({fails}/1001 below {need})")
    elapsed = time.perf_counter() - start
    ok = not short and elapsed < 120
    report(5, ok, ("forced rank >= floor(n*tail(k,H)/2^k) everywhere" if not short else
                   "forced rank below floor(n*tail(k,H)/2^k) at " + "; ".join(short))
           + f"; {elapsed:.2f}s")
    assert ok, short


def test_06_noisy_schedule_bound(report):
    start = time.perf_counter()
    bad, worst_slack = [], math.inf
    for k in (4, 6, 8):
        for H in (0, 1, 2):
            run = harness.run_scenario(harness.SimulationConfig(
                "noisy", k=k, H=H, t_grid=1000, fillers=0, seeds=list(range(1000)), samples=1,
                tolerance=1e-6))
            worst_slack = min(worst_slack, run.checks[0].slack)
            if not run.checks[0].passed:
                bad.append((k, H, run.max_ratio, run.bound))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 300
    report(6, ok, f"9 (k, H) cases, achieved <= noisy upper bound, min slack {worst_slack:.3g}; "
                  f"{elapsed:.2f}s")
    assert ok, bad


def test_07_gal_functional(report):
    start = time.perf_counter()
    worst, bad = math.inf, []
    for a in (1.5, 2, 3):
        seq = MergedSequence(np.arange(400) * math.log(a))
        for p in (1, 2, 4):
            for phi in range(p):
                target = a ** (p + 1 + phi) / (a ** p - 1)
                got = sequences.gal_sup(seq, p, phi)
                worst = min(worst, got - target)
                if got < target - 1e-6:
                    bad.append((a, p, phi, got, target))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    report(7, ok, f"min (sup F_q - a^(p+1+phi)/(a^p-1)) = {worst:.2e}; {elapsed:.2f}s")
    assert ok, bad


def test_08_rft(report):
    start = time.perf_counter()
    bad, subsets = [], 0
    for p in (2, 3, 4):
        for f in range(p):
            for r in (6, 8):
                run = harness.run_scenario(harness.SimulationConfig("rft", r=r, p=p, f=f))
                subsets += len(run.records)
                if not run.passed:
                    bad.append((p, f, r, [c.to_dict() for c in run.checks]))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    report(8, ok, f"{subsets} fault patterns within rft optimum / single-survivor r; "
                  f"{elapsed:.2f}s")
    assert ok, bad


def _built_families():
    for r in (4, 4.5, 5, 8):
        for k in range(4):
            yield r, advisor.build_pareto_schedule(r, k).family
        yield r, advisor.build_robust_noisy_schedule(3, 1, r).family
        for p in (2, 3, 4):
            ms = advisor.build_rft_schedule(r, p, 1)
            yield r, advisor.CyclicFamily(ms.processors[1].params["scale"], p, 400)


def test_09_envelopes(report):
    start = time.perf_counter()
    bad, checked = [], 0
    for r in (4, 4.5, 5, 8):
        z1, z2 = quadratic_roots(r)
        for b in np.linspace(z1, z2, 100):
            checked += 1
            if not sequences.check_zeta_envelope(Schedule.geometric(b), r).passed:
                bad.append(("geometric", r, b))
    alpha_bad = []
    for r, fam in _built_families():
        for m in fam.members():
            checked += 1
            if not sequences.check_zeta_envelope(m, r).passed:
                bad.append((fam.label, r))
        z1, z2 = bounds.zeta_roots(r)
        p = fam.count
        alpha = sequences.alpha_estimate(fam.merged())
        if not z1 ** (1 / p) - 0.02 <= alpha <= z2 ** (1 / p) + 0.02:
            alpha_bad.append((fam.label, r, alpha))
    elapsed = time.perf_counter() - start
    ok = not bad and not alpha_bad and elapsed < 10
    report(9, ok, f"{checked} envelope checks, merged alpha within zeta range; {elapsed:.2f}s")
    assert ok, (bad, alpha_bad)


def test_10_asymptotic_comparison(report):
    start = time.perf_counter()
    table = harness.compare_bounds_table([8, 16, 32, 64], [0.25])
    row = next(r for r in table.rows if r["k"] == 32)
    lo, hi = bounds.entropy_bounds(24, 8)
    tail = bounds.binomial_tail(24, 8)
    elapsed = time.perf_counter() - start
    ok = (row["H"] == 8 and row["noisy_upper"] < 2 and row["prior_work"] == pytest.approx(6.75)
          and tail == 1271626 and lo <= tail <= hi and elapsed < 1)
    report(10, ok, f"noisy upper (32, 8) = {row['noisy_upper']:.6g} < 2, prior work "
                   f"{row['prior_work']:.6g}; tail(24, 8) = {tail} in [{lo:.0f}, {hi:.0f}]; "
                   f"{elapsed:.2f}s")
    assert ok


def test_11_bound_ordering(report):
    start = time.perf_counter()
    bad, count = [], 0
    for k in range(21):
        for H in range(k // 2 + 1):
            count += 1
            lo, up = bounds.noisy_lower_bound(k, H).bound, bounds.noisy_upper_bound(k, H).bound
            if lo > up:
                bad.append((k, H, lo, up))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 1
    report(11, ok, f"noisy lower <= noisy upper for {count} (k, H) pairs; {elapsed:.2f}s")
    assert ok, bad
