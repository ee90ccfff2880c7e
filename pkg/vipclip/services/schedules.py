"""
Parameter schedules with the explicit constants of the high-probability theorems
and their corollaries, plus the closed-form bounds those results guarantee.

Log factors: A = ln(6(K+1)/beta) for every SEG case and for monotone SGDA,
A = ln(4(K+1)/beta) for the SGDA star-cocoercive and QSM cases.
"""

import logging
import math
from typing import List, Optional, Union

from ..config import BK_MAX_ITERATIONS, BK_REL_TOL
from ..errors import ConvergenceError, InvalidParameterError, ScheduleError
from ..models.schedule import (
    Method,
    Regime,
    Schedule,
    ScheduleParams,
    SegCase,
    SegSchedule,
    SgdaCase,
    SgdaSchedule,
    StepRule,
    parse_case,
)

logger = logging.getLogger(__name__)

# SEG constants
SEG_GAMMA_MONOTONE = 160.0
SEG_GAMMA_QSM = 650.0
SEG_LAMBDA_MONOTONE = 20.0
SEG_LAMBDA_QSM = 120.0
SEG_BATCH_MONOTONE = 10800.0
SEG_BATCH_QSM = 264600.0
SEG_WEAK_MINTY_RHO = 640.0

# SGDA constants
SGDA_GAMMA_MONOTONE = 170.0
SGDA_GAMMA_QSM = 400.0
SGDA_LAMBDA_MONOTONE = 60.0
SGDA_LAMBDA_QSM = 120.0
SGDA_BATCH_MONOTONE = 97200.0
SGDA_BATCH_QSM = 27000.0


def log_factor(K: int, beta: float, constant: float) -> float:
    """A = ln(constant (K+1) / beta), rejected when A < 1"""
    value = math.log(constant * (K + 1) / beta)
    if value < 1:
        raise ScheduleError(
            f"the theorems require ln({constant:g}(K+1)/beta) >= 1, got {value:.4f} "
            f"for K={K}, beta={beta}"
        )
    return value


def _ceil_batch(value: float) -> float:
    return float(max(1, math.ceil(value)))


def _require(value: Optional[float], name: str, case) -> float:
    if value is None or not value > 0:
        raise ScheduleError(f"case {case.value} needs a positive {name}, got {value}")
    return float(value)


def solve_bk_fixed_point(mu: float, R: float, sigma: float, K: int, beta: float,
                         log_arg_constant: float = 6.0, denom_constant: float = SEG_BATCH_QSM) -> float:
    """
    B = max{2, (K+1) mu^2 R^2 / (denom sigma^2 ln(c(K+1)/beta) ln^2 B)}.

    Iterates the averaged map B <- (B + T(B)) / 2 from B = 2. It has the same fixed
    point as T and its derivative (1 - 2/ln B)/2 is below one in modulus for B >= 2.
    """
    if not sigma > 0:
        raise InvalidParameterError("B_K is only defined for sigma > 0")
    if not mu > 0 or not R > 0:
        raise InvalidParameterError("B_K needs mu > 0 and R > 0")
    scale = (K + 1) * mu ** 2 * R ** 2 / (
        denom_constant * sigma ** 2 * math.log(log_arg_constant * (K + 1) / beta)
    )

    def step(b: float) -> float:
        return max(2.0, scale / math.log(b) ** 2)

    b = 2.0
    for _ in range(BK_MAX_ITERATIONS):
        nxt = 0.5 * (b + step(b))
        if abs(nxt - b) <= BK_REL_TOL * b:
            return nxt
        b = nxt
    raise ConvergenceError(f"B_K fixed point did not converge in {BK_MAX_ITERATIONS} iterations")


def build_seg_schedule(case: Union[str, SegCase], regime: Union[str, Regime],
                       params: ScheduleParams) -> SegSchedule:
    case, regime = SegCase(case), Regime(regime)
    K, R, sigma = params.K, params.R, params.sigma
    big_l = _require(params.L, "L", case)
    A = log_factor(K, params.beta, 6.0)

    if case is SegCase.MONOTONE:
        gamma = 1.0 / (SEG_GAMMA_MONOTONE * big_l * A)
        if regime is Regime.SMALL_STEP:
            if sigma > 0:
                gamma = min(gamma, R / (60.0 * sigma * math.sqrt(3.0 * (K + 1) * A)))
            m = 1.0
        else:
            m = _ceil_batch(SEG_BATCH_MONOTONE * (K + 1) * gamma ** 2 * sigma ** 2 * A / R ** 2)
        lam = StepRule.constant(R / (SEG_LAMBDA_MONOTONE * gamma * A))
        schedule = SegSchedule(
            case, regime, K, A, params,
            gamma1=gamma, gamma2=gamma, lambda1=lam, lambda2=lam,
            m1=StepRule.constant(m), m2=StepRule.constant(m),
        )

    elif case is SegCase.WEAK_MINTY:
        if regime is Regime.SMALL_STEP:
            raise ScheduleError("no small-batch schedule is known for the weak-Minty case")
        ceiling = 1.0 / (SEG_WEAK_MINTY_RHO * big_l * A)
        if params.rho > ceiling:
            raise ScheduleError(
                f"rho = {params.rho:.6g} exceeds 1/(640 L ln(6(K+1)/beta)) = {ceiling:.6g}"
            )
        gamma1 = 1.0 / (SEG_GAMMA_MONOTONE * big_l * A)
        gamma2 = gamma1 / 2.0
        m = _ceil_batch(81.0 * (K + 1) * sigma ** 2 / (640.0 * big_l ** 2 * R ** 2 * A))
        schedule = SegSchedule(
            case, regime, K, A, params,
            gamma1=gamma1, gamma2=gamma2,
            lambda1=StepRule.constant(R / (SEG_LAMBDA_MONOTONE * gamma1 * A)),
            lambda2=StepRule.constant(R / (SEG_LAMBDA_MONOTONE * gamma2 * A)),
            m1=StepRule.constant(m), m2=StepRule.constant(m),
        )

    elif case is SegCase.QSM:
        mu = _require(params.mu, "mu", case)
        gamma = 1.0 / (SEG_GAMMA_QSM * big_l * A)
        if regime is Regime.SMALL_STEP:
            if sigma > 0:
                bk = solve_bk_fixed_point(mu, R, sigma, K, params.beta, 6.0, SEG_BATCH_QSM)
                gamma = min(gamma, math.log(bk) / (mu * (K + 1)))
            batch = StepRule.constant(1)
        else:
            batch = StepRule("exp_batch", SEG_BATCH_QSM * gamma ** 2 * (K + 1) * sigma ** 2 * A / R ** 2,
                             gamma * mu)
        lam = StepRule("exp_decay", math.exp(-gamma * mu) * R / (SEG_LAMBDA_QSM * gamma * A), gamma * mu / 2.0)
        schedule = SegSchedule(
            case, regime, K, A, params,
            gamma1=gamma, gamma2=gamma, lambda1=lam, lambda2=lam, m1=batch, m2=batch,
        )

    else:
        raise ScheduleError("custom schedules are built with custom_seg_schedule")

    logger.info(
        f"Built SEG schedule {case.value}/{regime.value}: gamma1={schedule.gamma1:.6g}, "
        f"gamma2={schedule.gamma2:.6g}, A={A:.6g}, oracle calls={schedule.total_oracle_calls()}"
    )
    return schedule


def build_sgda_schedule(case: Union[str, SgdaCase], regime: Union[str, Regime],
                        params: ScheduleParams) -> SgdaSchedule:
    case, regime = SgdaCase(case), Regime(regime)
    K, R, sigma = params.K, params.R, params.sigma
    ell = _require(params.ell, "ell", case)

    if case in (SgdaCase.MONOTONE_SC, SgdaCase.SC):
        A = log_factor(K, params.beta, 6.0 if case is SgdaCase.MONOTONE_SC else 4.0)
        gamma = 1.0 / (SGDA_GAMMA_MONOTONE * ell * A)
        if regime is Regime.SMALL_STEP:
            if sigma > 0:
                gamma = min(gamma, R / (180.0 * sigma * math.sqrt(3.0 * (K + 1) * A)))
            m = 1.0
        else:
            m = _ceil_batch(SGDA_BATCH_MONOTONE * (K + 1) * gamma ** 2 * sigma ** 2 * A / R ** 2)
        schedule = SgdaSchedule(
            case, regime, K, A, params, gamma=gamma,
            lam=StepRule.constant(R / (SGDA_LAMBDA_MONOTONE * gamma * A)),
            m=StepRule.constant(m),
        )

    elif case is SgdaCase.QSM_SC:
        mu = _require(params.mu, "mu", case)
        A = log_factor(K, params.beta, 4.0)
        gamma = 1.0 / (SGDA_GAMMA_QSM * ell * A)
        if regime is Regime.SMALL_STEP:
            if sigma > 0:
                bk = solve_bk_fixed_point(mu, R, sigma, K, params.beta, 4.0, SGDA_BATCH_QSM)
                gamma = min(gamma, math.log(bk) / (mu * (K + 1)))
            batch = StepRule.constant(1)
        else:
            batch = StepRule("exp_batch", SGDA_BATCH_QSM * gamma ** 2 * (K + 1) * sigma ** 2 * A / R ** 2,
                             gamma * mu)
        schedule = SgdaSchedule(
            case, regime, K, A, params, gamma=gamma,
            lam=StepRule("exp_decay", math.exp(-gamma * mu) * R / (SGDA_LAMBDA_QSM * gamma * A), gamma * mu / 2.0),
            m=batch,
        )

    else:
        raise ScheduleError("custom schedules are built with custom_sgda_schedule")

    logger.info(
        f"Built SGDA schedule {case.value}/{regime.value}: gamma={schedule.gamma:.6g}, "
        f"A={A:.6g}, oracle calls={schedule.total_oracle_calls()}"
    )
    return schedule


def custom_seg_schedule(gamma1: float, gamma2: float, lambda1: float, lambda2: float,
                        m1: int, m2: int, K: int) -> SegSchedule:
    if not (gamma1 > 0 and gamma2 > 0 and lambda1 > 0 and lambda2 > 0 and m1 >= 1 and m2 >= 1 and K >= 0):
        raise InvalidParameterError("custom SEG schedule needs positive stepsizes, levels and batches")
    return SegSchedule(
        SegCase.CUSTOM, None, int(K), math.nan,
        gamma1=float(gamma1), gamma2=float(gamma2),
        lambda1=StepRule.constant(lambda1), lambda2=StepRule.constant(lambda2),
        m1=StepRule.constant(int(m1)), m2=StepRule.constant(int(m2)),
    )


def custom_sgda_schedule(gamma: float, lam: float, m: int, K: int) -> SgdaSchedule:
    if not (gamma > 0 and lam > 0 and m >= 1 and K >= 0):
        raise InvalidParameterError("custom SGDA schedule needs positive stepsize, level and batch")
    return SgdaSchedule(
        SgdaCase.CUSTOM, None, int(K), math.nan,
        gamma=float(gamma), lam=StepRule.constant(lam), m=StepRule.constant(int(m)),
    )


def build_schedule(method: Union[str, Method], case, regime, params: ScheduleParams) -> Schedule:
    method = Method(method)
    case = parse_case(case)
    if method.is_extragradient:
        if not isinstance(case, SegCase):
            raise InvalidParameterError(f"method {method.value} cannot use case {case.value}")
        return build_seg_schedule(case, regime, params)
    if not isinstance(case, SgdaCase):
        raise InvalidParameterError(f"method {method.value} cannot use case {case.value}")
    return build_sgda_schedule(case, regime, params)


def theoretical_bound(method: Union[str, Method], case, schedule: Schedule, R: float, K: int) -> float:
    """Right-hand side of the high-probability guarantee matching (method, case)"""
    method, case = Method(method), parse_case(case)
    if method.is_extragradient != isinstance(case, SegCase) or case.value == "Custom":
        raise InvalidParameterError(f"no guarantee for method {method.value} with case {case.value}")
    if method.is_extragradient != isinstance(schedule, SegSchedule):
        raise InvalidParameterError("schedule family does not match the method")

    if isinstance(schedule, SegSchedule):
        if case is SegCase.MONOTONE:
            return 9.0 * R ** 2 / (2.0 * schedule.gamma1 * (K + 1))
        if case is SegCase.WEAK_MINTY:
            return 36.0 * R ** 2 / (schedule.gamma1 * schedule.gamma2 * (K + 1))
        mu = schedule.params.mu if schedule.params else 0.0
        return 2.0 * math.exp(-schedule.gamma1 * mu * (K + 1)) * R ** 2

    if case is SgdaCase.MONOTONE_SC:
        return 9.0 * R ** 2 / (2.0 * schedule.gamma * (K + 1))
    if case is SgdaCase.SC:
        ell = schedule.params.ell if schedule.params else None
        if ell is None:
            raise InvalidParameterError("the star-cocoercive bound needs ell")
        return 2.0 * ell * R ** 2 / (schedule.gamma * (K + 1))
    mu = schedule.params.mu if schedule.params else 0.0
    return 2.0 * math.exp(-schedule.gamma * mu * (K + 1)) * R ** 2


def corollary_bound(method: Union[str, Method], case, regime: Union[str, Regime],
                    params: ScheduleParams) -> float:
    """Closed-form rate promised by the corollary for the (case, regime) schedule"""
    method, case, regime = Method(method), parse_case(case), Regime(regime)
    K, R, sigma, beta = params.K, params.R, params.sigma, params.beta
    n = K + 1
    small = regime is Regime.SMALL_STEP and sigma > 0

    if method.is_extragradient:
        big_l = _require(params.L, "L", case)
        A = log_factor(K, beta, 6.0)
        if case is SegCase.MONOTONE:
            bound = 720.0 * big_l * R ** 2 * A / n
            return max(bound, 270.0 * sigma * R * math.sqrt(A) / math.sqrt(n)) if small else bound
        if case is SegCase.WEAK_MINTY:
            return 1843200.0 * big_l ** 2 * R ** 2 * A ** 2 / n
        if case is SegCase.QSM:
            mu = _require(params.mu, "mu", case)
            bound = 2.0 * math.exp(-mu * n / (SEG_GAMMA_QSM * big_l * A)) * R ** 2
            if small:
                bk = solve_bk_fixed_point(mu, R, sigma, K, beta, 6.0, SEG_BATCH_QSM)
                bound = max(bound, 529200.0 * sigma ** 2 * A * math.log(bk) ** 2 / (mu ** 2 * n))
            return bound
    else:
        ell = _require(params.ell, "ell", case)
        if case is SgdaCase.MONOTONE_SC:
            A = log_factor(K, beta, 6.0)
            bound = 765.0 * ell * R ** 2 * A / n
            return max(bound, 810.0 * sigma * R * math.sqrt(3.0 * A) / math.sqrt(n)) if small else bound
        if case is SgdaCase.SC:
            A = log_factor(K, beta, 4.0)
            bound = 340.0 * ell ** 2 * R ** 2 * A / n
            return max(bound, 360.0 * ell * sigma * R * math.sqrt(3.0 * A) / math.sqrt(n)) if small else bound
        if case is SgdaCase.QSM_SC:
            mu = _require(params.mu, "mu", case)
            A = log_factor(K, beta, 4.0)
            bound = 2.0 * math.exp(-mu * n / (SGDA_GAMMA_QSM * ell * A)) * R ** 2
            if small:
                bk = solve_bk_fixed_point(mu, R, sigma, K, beta, 4.0, SGDA_BATCH_QSM)
                bound = max(bound, 54000.0 * sigma ** 2 * A * math.log(bk) ** 2 / (mu ** 2 * n))
            return bound
    raise InvalidParameterError(f"no corollary for method {method.value} with case {case.value}")


def schedule_violations(schedule: Schedule, params: Optional[ScheduleParams] = None) -> List[str]:
    """
    Theorem conditions the schedule breaks: stepsize ceilings, the weak-Minty
    relation gamma2 + 2 rho <= gamma1 and the batch-size floors, all for k in [0, K].
    """
    params = params or schedule.params
    if params is None:
        return ["no problem constants attached; theorem conditions cannot be checked"]
    K, R, sigma = params.K, params.R, params.sigma
    n = K + 1
    issues: List[str] = []
    tol = 1e-12

    def floor_check(name: str, rule: StepRule, floor_at) -> None:
        for k in range(schedule.iterations):
            if rule.as_batch(k) < floor_at(k) * (1 - tol):
                issues.append(f"{name}(k={k}) = {rule.as_batch(k)} is below the required {floor_at(k):.6g}")
                return

    if isinstance(schedule, SegSchedule):
        case = schedule.case
        if case is SegCase.CUSTOM or params.L is None:
            return ["custom schedule: no theorem applies"]
        A = log_factor(K, params.beta, 6.0)
        g1, g2 = schedule.gamma1, schedule.gamma2
        if case is SegCase.MONOTONE:
            if g1 > (1 + tol) / (SEG_GAMMA_MONOTONE * params.L * A):
                issues.append("gamma exceeds 1/(160 L A)")
            floor = max(1.0, SEG_BATCH_MONOTONE * n * g1 ** 2 * sigma ** 2 * A / R ** 2)
            floor_check("m", schedule.m1, lambda k: floor)
        elif case is SegCase.WEAK_MINTY:
            if g1 > (1 + tol) / (SEG_GAMMA_MONOTONE * params.L * A):
                issues.append("gamma1 exceeds 1/(160 L A)")
            if g2 + 2 * params.rho > g1 * (1 + tol):
                issues.append("gamma2 + 2 rho exceeds gamma1")
            m1_floor = max(1.0, 216.0 * max(g1 * g2 * n, math.sqrt(g1 ** 3 * g2 * n) * A) * sigma ** 2 / R ** 2)
            m2_floor = max(1.0, 3240.0 * n * g2 ** 2 * sigma ** 2 * A / R ** 2)
            floor_check("m1", schedule.m1, lambda k: m1_floor)
            floor_check("m2", schedule.m2, lambda k: m2_floor)
        else:
            if g1 > (1 + tol) / (SEG_GAMMA_QSM * params.L * A):
                issues.append("gamma exceeds 1/(650 L A)")
            floor_check("m", schedule.m1, lambda k: max(
                1.0, SEG_BATCH_QSM * g1 ** 2 * n * sigma ** 2 * A / (math.exp(-g1 * params.mu * k) * R ** 2)))
        return issues

    case = schedule.case
    if case is SgdaCase.CUSTOM or params.ell is None:
        return ["custom schedule: no theorem applies"]
    g = schedule.gamma
    if case in (SgdaCase.MONOTONE_SC, SgdaCase.SC):
        A = log_factor(K, params.beta, 6.0 if case is SgdaCase.MONOTONE_SC else 4.0)
        if g > (1 + tol) / (SGDA_GAMMA_MONOTONE * params.ell * A):
            issues.append("gamma exceeds 1/(170 ell A)")
        floor = max(1.0, SGDA_BATCH_MONOTONE * n * g ** 2 * sigma ** 2 * A / R ** 2)
        floor_check("m", schedule.m, lambda k: floor)
    else:
        A = log_factor(K, params.beta, 4.0)
        if g > (1 + tol) / (SGDA_GAMMA_QSM * params.ell * A):
            issues.append("gamma exceeds 1/(400 ell A)")
        floor_check("m", schedule.m, lambda k: max(
            1.0, SGDA_BATCH_QSM * g ** 2 * n * sigma ** 2 * A / (math.exp(-g * params.mu * k) * R ** 2)))
    return issues
