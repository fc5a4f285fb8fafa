import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contractsched.errors import DomainError, InvalidScheduleError, PreconditionError
from contractsched.sequences import (MergedSequence, MultiSchedule, Schedule, acceleration_ratio,
                                     alpha_estimate, check_zeta_envelope, fault_tolerant_ratio,
                                     gal_functional, gal_sup, longest_completed_by,
                                     ratio_profile, worst_fault_ratio)
from contractsched.bounds import zeta_roots

from oracles import quadratic_roots, simulated_fault_ratio, simulated_ratio


def test_doubling_ratio_is_four():
    assert acceleration_ratio(Schedule.geometric(2, horizon=60)) == pytest.approx(4, abs=1e-9)


def test_base_three():
    assert acceleration_ratio(Schedule.geometric(3)) == pytest.approx(4.5, abs=1e-9)


def test_rejects_non_increasing():
    with pytest.raises(InvalidScheduleError):
        Schedule.explicit([1, 2, 2])
    with pytest.raises(InvalidScheduleError):
        Schedule.explicit([1, -2])
    with pytest.raises(InvalidScheduleError):
        Schedule.geometric(1.0)


@given(st.lists(st.floats(0.01, 50), min_size=1, max_size=25))
def test_ratio_matches_event_simulation(incs):
    lengths = np.cumsum(incs) + 0.5
    s = Schedule.explicit(lengths)
    assert acceleration_ratio(s) == pytest.approx(simulated_ratio(lengths), rel=1e-9)


def test_sub_unit_first_contract_is_a_real_completion():
    # x_{-1} = 1 only stands in before anything completes
    s = Schedule.explicit([0.75, 1.75])
    assert acceleration_ratio(s) == pytest.approx(2.5 / 0.75)


@given(st.floats(1.05, 8), st.floats(0.1, 100))
def test_ratio_is_scale_invariant_after_first_term(b, c):
    s = Schedule.geometric(b, horizon=80)
    prof, prof_c = ratio_profile(s), ratio_profile(s.scaled(c))
    np.testing.assert_allclose(prof[1:], prof_c[1:], rtol=1e-9)


@pytest.mark.parametrize("b", [1.2, 1.5, 2.5, 4.0, 6.0])
def test_horizon_gap_closes(b):
    # finite horizons approach b^2/(b-1) from below
    limit = b * b / (b - 1)
    assert limit - acceleration_ratio(Schedule.geometric(b, horizon=200)) < 1e-6
    assert acceleration_ratio(Schedule.geometric(b, horizon=20)) <= limit + 1e-12


def test_longest_completed_examples():
    g = Schedule.geometric(2)
    assert longest_completed_by(g, 3) == 2
    assert longest_completed_by(g, 0.5) is None
    assert longest_completed_by(g, 7) == 4
    assert longest_completed_by(g, 6.999) == 2
    with pytest.raises(DomainError):
        longest_completed_by(g, -1)


def test_schedule_json_round_trip():
    for s in (Schedule.geometric(1.7, scale=3, horizon=40), Schedule.explicit([1, 3, 9.5])):
        back = Schedule.from_dict(json.loads(json.dumps(s.to_dict())))
        np.testing.assert_allclose(back.log_lengths, s.log_lengths, atol=1e-12)
        assert back.kind == s.kind


def test_single_processor_fault_ratio_equals_acceleration_ratio():
    s = Schedule.geometric(2.3, horizon=50)
    m = MultiSchedule((s,))
    assert fault_tolerant_ratio(m) == pytest.approx(acceleration_ratio(s), rel=1e-12)


def _cyclic(b, l, horizon):
    return MultiSchedule(tuple(Schedule(np.log(b) * (i + l * np.arange(horizon)))
                               for i in range(l)), fault_budget=l - 1)


def test_fault_example_sqrt2():
    m = _cyclic(math.sqrt(2), 2, 150)
    assert fault_tolerant_ratio(m, {0}) == pytest.approx(4, abs=1e-6)
    assert fault_tolerant_ratio(m, {1}) == pytest.approx(4, abs=1e-6)
    with pytest.raises(DomainError):
        fault_tolerant_ratio(m, {0, 1})


@pytest.mark.parametrize("b,l", [(1.3, 3), (2 ** 0.25, 4), (1.7, 2)])
def test_fault_ratio_matches_event_simulation(b, l):
    m = _cyclic(b, l, 30)
    procs = [list(s.lengths) for s in m.processors]
    for size in range(l):
        for fs in itertools.combinations(range(l), size):
            assert fault_tolerant_ratio(m, fs) == pytest.approx(
                simulated_fault_ratio(procs, set(fs)), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(1.2, 3.0), min_size=3, max_size=3), st.integers(0, 2), st.integers(0, 2))
def test_more_faults_never_help(bases, a, c):
    m = MultiSchedule(tuple(Schedule.geometric(b, scale=1 + i / 3, horizon=25)
                            for i, b in enumerate(bases)), fault_budget=2)
    small = {a}
    big = {a, c} if c != a else {a}
    assert fault_tolerant_ratio(m, small) <= fault_tolerant_ratio(m, big) * (1 + 1e-12)


def test_worst_fault_ratio_picks_max():
    m = _cyclic(1.4, 3, 40)
    worst, arg = worst_fault_ratio(m, 1)
    assert worst == max(fault_tolerant_ratio(m, {j}) for j in range(3))
    assert fault_tolerant_ratio(m, arg) == worst


def test_merged_is_sorted_union():
    m = _cyclic(1.5, 3, 10)
    np.testing.assert_allclose(m.merged().values, 1.5 ** np.arange(30), rtol=1e-12)


def test_gal_examples():
    seq = MergedSequence(np.arange(400) * math.log(2))
    assert gal_functional(seq, 10, 1, 0) == pytest.approx((2 ** 12 - 1) / 2 ** 10, rel=1e-12)
    assert gal_functional(seq, 0, 1, 0) == pytest.approx(3, rel=1e-12)
    with pytest.raises(DomainError):
        gal_functional(seq, 399, 1, 0)


@pytest.mark.parametrize("a,p,phi", [(1.5, 2, 1), (2, 4, 3), (3, 1, 0), (2, 2, 0)])
def test_gal_sup_matches_pointwise(a, p, phi):
    seq = MergedSequence(np.arange(120) * math.log(a))
    direct = max(gal_functional(seq, q, p, phi) for q in range(p - 1, len(seq) - phi - 1))
    assert gal_sup(seq, p, phi) == pytest.approx(direct, rel=1e-9)
    assert gal_sup(seq, p, phi) <= a ** (p + 1 + phi) / (a ** p - 1) * (1 + 1e-12)


@pytest.mark.parametrize("a", [1.1, 1.5, 2.0, 3.0])
def test_alpha_of_geometric(a):
    assert alpha_estimate(MergedSequence(np.arange(300) * math.log(a))) == pytest.approx(a, rel=1e-9)


@pytest.mark.parametrize("r", [4, 4.5, 5, 8])
def test_envelope_passes_for_robust_geometric(r):
    z1, z2 = quadratic_roots(r)
    for b in np.linspace(z1, z2, 25):
        assert check_zeta_envelope(Schedule.geometric(b), r).passed


def test_envelope_detects_halved_second_length():
    s = Schedule.geometric(2, horizon=60)
    assert check_zeta_envelope(s, 4).passed
    assert not check_zeta_envelope(s, 4, x1=1.0).passed


def test_envelope_precondition():
    with pytest.raises(PreconditionError):
        check_zeta_envelope(Schedule.geometric(5), 4.5)
    with pytest.raises(DomainError):
        check_zeta_envelope(Schedule.geometric(2), 3)


def test_zeta_roots_agree_with_quadratic_formula():
    for r in np.linspace(4, 100, 37):
        np.testing.assert_allclose(zeta_roots(r), quadratic_roots(r), rtol=1e-10)
