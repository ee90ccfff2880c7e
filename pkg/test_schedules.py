"""
Tests for the theorem schedules, the B_K fixed point and the closed-form bounds
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from vipclip.errors import InvalidParameterError, ScheduleError
from vipclip.models.schedule import (
    Method,
    Regime,
    ScheduleParams,
    SegCase,
    SegSchedule,
    SgdaCase,
    SgdaSchedule,
    StepRule,
)
from vipclip.services.schedules import (
    build_schedule,
    build_seg_schedule,
    build_sgda_schedule,
    corollary_bound,
    custom_seg_schedule,
    custom_sgda_schedule,
    log_factor,
    schedule_violations,
    solve_bk_fixed_point,
    theoretical_bound,
)

A_100 = math.log(100.0)


def test_monotone_large_step_example():
    params = ScheduleParams(R=1.0, K=5, beta=0.36, sigma=0.0, L=1.0)
    schedule = build_seg_schedule("Monotone", "LargeStep", params)
    assert schedule.log_factor == pytest.approx(A_100)
    assert schedule.gamma1 == pytest.approx(1.0 / (160 * A_100))
    assert schedule.gamma1 == pytest.approx(1.3572e-3, rel=1e-4)
    assert schedule.gamma2 == schedule.gamma1
    assert schedule.lambda1(0) == pytest.approx(8.0)
    assert schedule.lambda2(5) == pytest.approx(8.0)
    assert schedule.m1.as_batch(0) == 1 and schedule.m2.as_batch(5) == 1
    assert schedule.iterations == 6


def test_monotone_lambda_scales_with_r():
    params = ScheduleParams(R=2.5, K=5, beta=0.36, sigma=0.0, L=1.0)
    assert build_seg_schedule("Monotone", "LargeStep", params).lambda1(3) == pytest.approx(20.0)


def test_monotone_large_batch_formula():
    params = ScheduleParams(R=1.0, K=99, beta=0.1, sigma=2.0, L=1.0)
    schedule = build_seg_schedule(SegCase.MONOTONE, Regime.LARGE_STEP, params)
    a = math.log(6 * 100 / 0.1)
    gamma = 1 / (160 * a)
    expected = max(1, math.ceil(10800 * 100 * gamma ** 2 * 4.0 * a))
    assert schedule.m1.as_batch(0) == expected
    assert schedule.total_oracle_calls() == 2 * 100 * expected


def test_monotone_small_step():
    params = ScheduleParams(R=1.0, K=999, beta=0.1, sigma=1.0, L=1.0)
    schedule = build_seg_schedule("Monotone", "SmallStep", params)
    a = math.log(6 * 1000 / 0.1)
    expected = min(1 / (160 * a), 1 / (60 * math.sqrt(3 * 1000 * a)))
    assert schedule.gamma1 == pytest.approx(expected)
    assert schedule.m1.as_batch(10) == 1
    assert schedule.lambda1(0) == pytest.approx(1 / (20 * expected * a))


def test_weak_minty_schedule():
    eps = 1e-4
    rho = eps / (1 + eps ** 2)
    params = ScheduleParams(R=1.0, K=500, beta=0.1, sigma=0.5, L=math.sqrt(1 + eps ** 2), rho=rho)
    schedule = build_seg_schedule("WeakMinty", "LargeStep", params)
    assert schedule.gamma2 == pytest.approx(schedule.gamma1 / 2)
    assert schedule.gamma2 + 2 * rho <= schedule.gamma1
    assert schedule.lambda2(0) == pytest.approx(2 * schedule.lambda1(0))
    a = math.log(6 * 501 / 0.1)
    m = max(1, math.ceil(81 * 501 * 0.25 / (640 * params.L ** 2 * a)))
    assert schedule.m1.as_batch(0) == m == schedule.m2.as_batch(400)
    assert schedule_violations(schedule) == []


def test_weak_minty_rejects_large_rho():
    params = ScheduleParams(R=1.0, K=500, beta=0.1, sigma=0.5, L=math.sqrt(1.25), rho=0.4)
    with pytest.raises(ScheduleError, match="rho"):
        build_seg_schedule("WeakMinty", "LargeStep", params)


def test_weak_minty_has_no_small_step_schedule():
    params = ScheduleParams(R=1.0, K=10, beta=0.1, sigma=0.5, L=1.0, rho=0.0)
    with pytest.raises(ScheduleError):
        build_seg_schedule("WeakMinty", "SmallStep", params)


def test_qsm_large_step_formulas():
    params = ScheduleParams(R=1.5, K=200, beta=0.1, sigma=1.0, L=2.0, mu=1.0)
    schedule = build_seg_schedule("QSM", "LargeStep", params)
    a = math.log(6 * 201 / 0.1)
    gamma = 1 / (650 * 2.0 * a)
    assert schedule.gamma1 == pytest.approx(gamma)
    for k in (0, 17, 200):
        lam = math.exp(-gamma * (1 + k / 2)) * 1.5 / (120 * gamma * a)
        assert schedule.lambda1(k) == pytest.approx(lam, rel=1e-12)
        m = max(1, math.ceil(264600 * gamma ** 2 * 201 * a / (math.exp(-gamma * k) * 1.5 ** 2)))
        assert abs(schedule.m1.as_batch(k) - m) <= 1
    lambdas = schedule.lambda1.table(schedule.iterations)
    assert np.all(np.diff(lambdas) < 0)
    assert schedule_violations(schedule) == []


def test_qsm_small_step_uses_bk():
    params = ScheduleParams(R=1.0, K=10_000, beta=0.1, sigma=0.01, L=2.0, mu=1.0)
    schedule = build_seg_schedule("QSM", "SmallStep", params)
    bk = solve_bk_fixed_point(1.0, 1.0, 0.01, 10_000, 0.1, 6.0, 264600.0)
    a = math.log(6 * 10_001 / 0.1)
    assert schedule.gamma1 == pytest.approx(min(1 / (650 * 2 * a), math.log(bk) / 10_001))
    assert schedule.m1.as_batch(5) == 1


def test_sgda_monotone_example():
    params = ScheduleParams(R=1.0, K=5, beta=0.36, sigma=0.0, ell=1.0)
    schedule = build_sgda_schedule("MonotoneSC", "LargeStep", params)
    assert schedule.log_factor == pytest.approx(A_100)
    assert schedule.gamma == pytest.approx(1 / (170 * A_100))
    assert schedule.gamma == pytest.approx(1.2773e-3, rel=1e-4)
    assert schedule.lam(0) == pytest.approx(17 / 6)


def test_sgda_sc_small_step_without_noise():
    params = ScheduleParams(R=1.0, K=5, beta=0.36, sigma=0.0, ell=2.0)
    schedule = build_sgda_schedule("SC", "SmallStep", params)
    a = math.log(4 * 6 / 0.36)
    assert schedule.log_factor == pytest.approx(a)
    assert schedule.gamma == pytest.approx(1 / (170 * 2.0 * a))
    assert schedule.m.as_batch(3) == 1


def test_sgda_qsm_lambda_ratio():
    params = ScheduleParams(R=1.0, K=50, beta=0.1, sigma=1.0, ell=3.0, mu=0.5)
    schedule = build_sgda_schedule("QSM_SC", "LargeStep", params)
    ratio = schedule.lam(0) / schedule.lam(1)
    assert ratio == pytest.approx(math.exp(schedule.gamma * 0.5 / 2))
    a = math.log(4 * 51 / 0.1)
    assert schedule.gamma == pytest.approx(1 / (400 * 3.0 * a))
    assert schedule_violations(schedule) == []


def test_missing_constants_are_rejected():
    with pytest.raises(ScheduleError):
        build_seg_schedule("QSM", "LargeStep", ScheduleParams(R=1.0, K=5, beta=0.1, L=1.0))
    with pytest.raises(ScheduleError):
        build_sgda_schedule("SC", "LargeStep", ScheduleParams(R=1.0, K=5, beta=0.1))


def test_log_factor_below_one_is_rejected():
    with pytest.raises(ScheduleError):
        log_factor(0, 3.0, 6.0)
    with pytest.raises(InvalidParameterError):
        ScheduleParams(R=1.0, K=5, beta=3.0)


def test_build_schedule_checks_method_family():
    params = ScheduleParams(R=1.0, K=5, beta=0.1, L=1.0, ell=1.0)
    assert isinstance(build_schedule(Method.SEG, "Monotone", "LargeStep", params), SegSchedule)
    assert isinstance(build_schedule("ClippedSGDA", "MonotoneSC", "LargeStep", params), SgdaSchedule)
    with pytest.raises(InvalidParameterError):
        build_schedule("ClippedSEG", "SC", "LargeStep", params)


def _bk_bisection(scale):
    return brentq(lambda b: b * math.log(b) ** 2 - scale, 2.0, 1e12, xtol=1e-14, rtol=1e-14)


@pytest.mark.parametrize("sigma", [0.01, 0.0561])
def test_bk_matches_bisection(sigma):
    mu, r, k, beta = 1.0, 1.0, 100_000, 0.1
    scale = (k + 1) * mu ** 2 * r ** 2 / (264600 * sigma ** 2 * math.log(6 * (k + 1) / beta))
    assert scale / math.log(2.0) ** 2 > 2.0
    bk = solve_bk_fixed_point(mu, r, sigma, k, beta, 6.0, 264600.0)
    assert bk == pytest.approx(_bk_bisection(scale), rel=1e-6)
    assert bk == pytest.approx(max(2.0, scale / math.log(bk) ** 2), rel=1e-6)


def test_bk_floor():
    assert solve_bk_fixed_point(1.0, 1.0, 1.0, 100_000, 0.1, 6.0, 264600.0) == 2.0
    assert solve_bk_fixed_point(1.0, 1.0, 1.0, 10, 0.1, 4.0, 27000.0) == 2.0


def test_bk_grows_with_k():
    small = solve_bk_fixed_point(1.0, 1.0, 0.01, 100_000, 0.1)
    large = solve_bk_fixed_point(1.0, 1.0, 0.01, 200_000, 0.1)
    assert large > small


def test_bk_needs_noise():
    with pytest.raises(InvalidParameterError):
        solve_bk_fixed_point(1.0, 1.0, 0.0, 100, 0.1)


def test_theoretical_bound_examples():
    seg = SegSchedule(SegCase.MONOTONE, Regime.LARGE_STEP, 99, 1.0, gamma1=0.01, gamma2=0.01)
    assert theoretical_bound("ClippedSEG", "Monotone", seg, 1.0, 99) == pytest.approx(4.5)

    sgda = SgdaSchedule(
        SgdaCase.SC, Regime.LARGE_STEP, 199, 1.0,
        params=ScheduleParams(R=1.0, K=199, beta=0.1, ell=1.0), gamma=0.01,
    )
    assert theoretical_bound("ClippedSGDA", "SC", sgda, 1.0, 199) == pytest.approx(1.0)

    qsm = SegSchedule(
        SegCase.QSM, Regime.LARGE_STEP, 10, 1.0,
        params=ScheduleParams(R=3.0, K=10, beta=0.1, L=1.0, mu=0.0), gamma1=0.1, gamma2=0.1,
    )
    assert theoretical_bound("ClippedSEG", "QSM", qsm, 3.0, 10) == pytest.approx(18.0)


def test_theoretical_bound_rejects_mismatch():
    seg = custom_seg_schedule(0.1, 0.1, 1.0, 1.0, 1, 1, 10)
    with pytest.raises(InvalidParameterError):
        theoretical_bound("ClippedSEG", "Custom", seg, 1.0, 10)
    with pytest.raises(InvalidParameterError):
        theoretical_bound("ClippedSGDA", "Monotone", seg, 1.0, 10)


@pytest.mark.parametrize("method, case", [
    ("ClippedSEG", "Monotone"),
    ("ClippedSEG", "QSM"),
    ("ClippedSGDA", "MonotoneSC"),
    ("ClippedSGDA", "SC"),
    ("ClippedSGDA", "QSM_SC"),
])
def test_corollary_matches_theorem_for_large_steps(method, case):
    params = ScheduleParams(R=1.3, K=300, beta=0.05, sigma=0.7, L=2.0, mu=0.5, ell=4.0)
    schedule = build_schedule(method, case, "LargeStep", params)
    theorem = theoretical_bound(method, case, schedule, params.R, params.K)
    assert corollary_bound(method, case, "LargeStep", params) == pytest.approx(theorem, rel=1e-12)


def test_corollary_matches_theorem_for_weak_minty():
    params = ScheduleParams(R=1.0, K=500, beta=0.1, sigma=0.5, L=1.0, rho=1e-5)
    schedule = build_seg_schedule("WeakMinty", "LargeStep", params)
    theorem = theoretical_bound("ClippedSEG", "WeakMinty", schedule, 1.0, 500)
    assert corollary_bound("ClippedSEG", "WeakMinty", "LargeStep", params) == pytest.approx(theorem)


def test_custom_schedules():
    seg = custom_seg_schedule(0.1, 0.05, 2.0, math.inf, 2, 3, 9)
    assert seg.case is SegCase.CUSTOM and seg.regime is None
    assert seg.total_oracle_calls() == 50
    assert math.isinf(seg.lambda2(4))
    assert schedule_violations(seg) != []

    sgda = custom_sgda_schedule(0.05, 0.5, 1, 200)
    assert sgda.total_oracle_calls() == 201
    assert math.isinf(sgda.unclipped().lam(0))
    with pytest.raises(InvalidParameterError):
        custom_sgda_schedule(0.05, 0.5, 0, 200)


def test_violations_flag_a_too_large_stepsize():
    params = ScheduleParams(R=1.0, K=50, beta=0.1, sigma=0.0, L=1.0)
    schedule = build_seg_schedule("Monotone", "LargeStep", params)
    bigger = SegSchedule(
        SegCase.MONOTONE, Regime.LARGE_STEP, 50, schedule.log_factor, params,
        gamma1=2 * schedule.gamma1, gamma2=2 * schedule.gamma1,
        lambda1=schedule.lambda1, lambda2=schedule.lambda2, m1=schedule.m1, m2=schedule.m2,
    )
    assert any("gamma" in issue for issue in schedule_violations(bigger))


def test_step_rules():
    decay = StepRule("exp_decay", 2.0, 0.5)
    assert decay(2) == pytest.approx(2.0 * math.exp(-1.0))
    batch = StepRule("exp_batch", 1.2, 0.1)
    assert batch.as_batch(0) == 2
    assert StepRule.from_dict(decay.to_dict()) == decay
    with pytest.raises(InvalidParameterError):
        StepRule("linear", 1.0)


def test_schedule_serialization():
    params = ScheduleParams(R=1.0, K=20, beta=0.1, sigma=1.0, L=2.0, mu=1.0)
    data = build_seg_schedule("QSM", "LargeStep", params).to_dict()
    assert data["case"] == "QSM" and data["method_family"] == "SEG"
    assert data["rules"]["lambda1"]["type"] == "exp_decay"
    assert len(data["tables"]["m1"]) == 21

    long_run = build_seg_schedule("Monotone", "LargeStep", ScheduleParams(R=1.0, K=20_000, beta=0.1, L=1.0))
    assert "tables" not in long_run.to_dict()

    custom = custom_sgda_schedule(0.1, math.inf, 1, 3).to_dict()
    assert custom["tables"]["lambda"] == ["inf"] * 4
