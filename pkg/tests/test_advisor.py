import json
import math

import numpy as np
import pytest

from contractsched import advisor, bounds
from contractsched.errors import DomainError, PreconditionError
from contractsched.querygames import AdviceChannel, lie_patterns
from contractsched.sequences import acceleration_ratio, fault_tolerant_ratio, worst_fault_ratio

from oracles import best_member_bruteforce, quadratic_roots, simulated_ratio


def test_best_member_example():
    fam = advisor.CyclicFamily(2, 2)
    assert advisor.best_member_at(fam, 5) == (0, 4)
    assert advisor.best_member_at(fam, 4.9) == (1, 2)
    assert advisor.best_member_at(advisor.CyclicFamily(1.7, 1), 100)[0] == 0
    with pytest.raises(PreconditionError):
        advisor.best_member_at(fam, 0.5)


@pytest.mark.parametrize("b,l", [(2, 2), (1.3, 3), (2 ** 0.25, 4), (1.1, 8)])
def test_best_member_against_enumeration(b, l):
    fam = advisor.CyclicFamily(b, l, 60)
    rng = np.random.default_rng(1)
    t_max = math.exp(fam.log_completion_times()[20 * l])
    for T in np.exp(rng.uniform(0, math.log(t_max), 300)):
        m, length = advisor.best_member_at(fam, T)
        om, olength = best_member_bruteforce(b, l, T)
        assert m == om and length == pytest.approx(olength, rel=1e-9)


@pytest.mark.parametrize("l", [2, 4, 8])
def test_ranking_is_cyclic_rotation(l):
    fam = advisor.CyclicFamily(1.05 ** (8 / l), l)
    times = fam.log_completion_times()
    for e in np.linspace(1, times.size - 1, 500).astype(int):
        for prior in (True, False):
            ranks = fam.ranking_at(math.exp(times[e]), prior)
            best = ranks.index(0)
            assert ranks == [(best - m) % l for m in range(l)]


def test_family_merges_to_all_powers():
    fam = advisor.CyclicFamily(1.3, 4, 25)
    np.testing.assert_allclose(fam.merged().values, 1.3 ** np.arange(100), rtol=1e-12)
    merged = np.sort(np.concatenate([m.lengths for m in fam.members()]))
    np.testing.assert_allclose(merged, 1.3 ** np.arange(100), rtol=1e-12)


@pytest.mark.parametrize("b,l", [(1.5, 2), (2 ** 0.25, 4), (1.2, 3)])
def test_member_robustness(b, l):
    fam = advisor.CyclicFamily(b, l, 120)
    for m in fam.members():
        assert acceleration_ratio(m) <= b ** (2 * l) / (b ** l - 1) + 1e-9
        assert acceleration_ratio(m) == pytest.approx(simulated_ratio(list(m.lengths)), rel=1e-9)


def test_completion_times_closed_form():
    fam = advisor.CyclicFamily(1.4, 3, 10)
    for i, m in enumerate(fam.members()):
        np.testing.assert_allclose(np.log(m.completion_times()),
                                   fam.log_completion_times()[i::3], rtol=1e-12)


def test_pareto_examples():
    plan = advisor.build_pareto_schedule(4, 0)
    assert plan.base == pytest.approx(2) and plan.family.count == 1
    plan = advisor.build_pareto_schedule(5, 1)
    assert plan.base == pytest.approx(math.sqrt(3))
    for m in plan.family.members():
        assert acceleration_ratio(m) <= 4.5 + 1e-9
    with pytest.raises(DomainError):
        advisor.build_pareto_schedule(3.5, 1)


def test_plan_json_and_csv():
    plan = advisor.build_robust_noisy_schedule(3, 1, 4.5)
    d = json.loads(plan.to_json())
    assert set(d) == {"mode", "k", "H", "r", "b", "l", "horizon"}
    assert advisor.AdvicePlan.from_dict(d) == plan
    lines = plan.contract_table(rows_per_member=2).splitlines()
    assert lines[0] == "member,j,length,completion_time"
    assert len(lines) == 1 + 8 * 2
    with pytest.raises(DomainError):
        advisor.AdvicePlan(advisor.CyclicFamily(1.2, 3), 1)
    with pytest.raises(DomainError):
        advisor.AdvicePlan(advisor.CyclicFamily(1.2, 2), 1, mode="robustNoisy")


def test_noisy_builders():
    assert advisor.build_noisy_schedule(1, 0).base == pytest.approx(math.sqrt(2))
    assert advisor.build_robust_noisy_schedule(1, 0, 4).base == pytest.approx(math.sqrt(2))
    plan = advisor.build_robust_noisy_schedule(3, 1, 4.5)
    for m in plan.family.members():
        assert acceleration_ratio(m) <= 4.5 + 1e-6


def _probe_times(fam, count=200):
    times = fam.log_completion_times()
    idx = np.linspace(1, times.size - 1, count).astype(int)
    return [(math.exp(times[e]), prior) for e in idx for prior in (True, False)]


def test_truthful_selection_picks_best():
    plan = advisor.build_noisy_schedule(3, 0)
    for T, prior in _probe_times(plan.family, 100):
        sel = advisor.select_with_noisy_advice(plan, AdviceChannel.truthful(), T, prior)
        assert sel.member == advisor.best_member_at(plan.family, T, prior)[0]
        assert sel.ratio <= bounds.noisy_upper_objective(plan.base, 3, 0) + 1e-9


def test_noisy_selection_all_one_lie_patterns():
    plan = advisor.build_noisy_schedule(4, 1)
    bound = bounds.noisy_upper_bound(4, 1).bound
    worst = 0.0
    for T, prior in _probe_times(plan.family, 60):
        for lies in lie_patterns(4, 1):
            sel = advisor.select_with_noisy_advice(plan, AdviceChannel.scripted(None, lies, 1),
                                                   T, prior)
            worst = max(worst, sel.ratio)
    assert worst <= bound + 1e-6


def test_robust_selection_survives_budget_violation():
    plan = advisor.build_robust_noisy_schedule(3, 1, 4.5)
    for T, prior in _probe_times(plan.family, 40):
        for lies in ({0, 1}, {0, 1, 2}, {1, 2}):
            sel = advisor.select_with_noisy_advice(plan, AdviceChannel.scripted(None, lies, 1),
                                                   T, prior, strict=False)
            assert sel.ratio <= 4.5 + 1e-6


def test_rft_examples():
    ms = advisor.build_rft_schedule(8, 2, 1)
    assert ms.processors[0].params["base"] == pytest.approx(2)
    for fs in ({0}, {1}):
        assert fault_tolerant_ratio(ms, fs) <= 8
    assert fault_tolerant_ratio(ms) <= 4 + 1e-6
    ms = advisor.build_rft_schedule(9, 3, 2)
    value = bounds.rft_optimal_value(9, 3, 2).value
    assert worst_fault_ratio(ms, 2)[0] <= min(9, value) + 1e-6
    with pytest.raises(DomainError):
        advisor.build_rft_schedule(8, 2, 2)


def test_rft_single_processor_is_geometric():
    ms = advisor.build_rft_schedule(5, 1, 0)
    z1, z2 = quadratic_roots(5)
    b = ms.processors[0].params["base"]
    assert z1 <= b <= z2
    assert fault_tolerant_ratio(ms) == pytest.approx(4, abs=1e-6)
