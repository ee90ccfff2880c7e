import logging
import math
import os
import time
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from ..config import CURVE_POINTS, VIPCLIP_THREADS
from ..errors import InvalidParameterError
from ..models.experiment import ExperimentSpec, Metric
from ..models.report import ExperimentReport, MethodComparison, SeedOutcome
from ..models.schedule import Schedule
from ..models.trajectory import Trajectory
from ..services.metrics import avg_sq_operator_norm, dist_sq, gap_restricted
from ..services.schedules import (
    build_schedule,
    corollary_bound,
    schedule_violations,
    theoretical_bound,
)
from ..services.solvers import run_solver
from ..services.tails import linear_quantile

logger = logging.getLogger(__name__)


def success_fraction(values: Sequence[float], bound: float) -> float:
    """Fraction of finite values <= bound; non-finite values count as failures"""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvalidParameterError("need at least one value")
    hits = np.isfinite(values) & (values <= bound)
    return float(np.count_nonzero(hits)) / values.size


def empirical_quantile(values: Sequence[float], q: float) -> float:
    """
    Same convention as the tail quartiles. NaN is read as +inf, so diverged seeds
    sit at the top of the order.
    """
    values = np.asarray(values, dtype=float)
    return linear_quantile(np.where(np.isnan(values), np.inf, values), q)


def resolve_threads(threads: Optional[Union[int, str]] = None) -> int:
    """Config value, then VIPCLIP_THREADS, then the CPU count"""
    for value in (threads, VIPCLIP_THREADS):
        if value is None or str(value).lower() == "auto":
            continue
        try:
            count = int(value)
        except ValueError:
            raise InvalidParameterError(f"thread count must be an integer or 'auto', got {value!r}")
        if count < 1:
            raise InvalidParameterError(f"thread count must be positive, got {count}")
        return count
    return os.cpu_count() or 1


def curve_grid(iterations: int, points: int = CURVE_POINTS) -> List[int]:
    """Up to `points` iteration counts spread over 1..iterations"""
    grid = np.unique(np.linspace(1, iterations, min(points, iterations)).round().astype(int))
    return [int(n) for n in grid]


def _final_metric(spec: ExperimentSpec, traj: Trajectory) -> Tuple[float, bool]:
    """Final metric value and whether the gap solver (if used) met its certificate"""
    if traj.diverged:
        return math.nan, True
    if spec.metric is Metric.DIST_SQ:
        return dist_sq(traj.final_iterate, spec.problem), True
    if spec.metric is Metric.AVG_SQ_NORM:
        return avg_sq_operator_norm(traj, spec.problem), True
    gap = gap_restricted(spec.problem, traj.averaged_point, spec.R)
    return gap.value, gap.converged


def _anytime_curve(spec: ExperimentSpec, traj: Trajectory, grid: Iterable[int]) -> List[tuple]:
    curve = []
    for n in grid:
        if n > traj.steps_completed or (traj.diverged and n >= traj.steps_completed):
            break
        if spec.metric is Metric.DIST_SQ:
            value = float(traj.dist_sq_history[n])
        elif spec.metric is Metric.AVG_SQ_NORM:
            value = float(np.mean(traj.sq_norm_history[:n]))
        else:
            value = gap_restricted(spec.problem, traj.checkpoints[n], spec.R).value
        curve.append((n, value))
    return curve


def _run_seed(spec: ExperimentSpec, schedule: Schedule, seed: int) -> SeedOutcome:
    grid = curve_grid(schedule.iterations) if spec.record_curves else []
    traj = run_solver(
        spec.problem, spec.noise, spec.method, schedule, spec.x0, seed,
        record_iterates=False,
        checkpoints=grid if spec.metric is Metric.GAP else None,
    )
    value, gap_converged = _final_metric(spec, traj)
    return SeedOutcome(
        seed=seed,
        metric_value=value,
        gap_converged=gap_converged,
        diverged=traj.diverged,
        oracle_calls=traj.oracle_calls,
        curve=_anytime_curve(spec, traj, grid) if grid else [],
    )


class ExperimentRunner:
    """Fans an ExperimentSpec out over seeds and reduces the outcomes to a report"""

    def resolve_schedule(self, spec: ExperimentSpec) -> Schedule:
        if spec.schedule is not None:
            return spec.schedule
        return build_schedule(spec.method, spec.case, spec.regime, spec.schedule_params())

    def run_seeds(self, spec: ExperimentSpec, schedule: Schedule, seeds: Sequence[int],
                  n_jobs: int = 1) -> List[SeedOutcome]:
        """One outcome per seed, in the order given; each seed keys its own streams"""
        return Parallel(n_jobs=n_jobs)(delayed(_run_seed)(spec, schedule, seed) for seed in seeds)

    def run_experiment(self, spec: ExperimentSpec) -> ExperimentReport:
        schedule = self.resolve_schedule(spec)
        params = spec.schedule_params()

        violations: List[str] = []
        bound, cor_bound = math.inf, None
        if not spec.is_custom:
            bound = theoretical_bound(spec.method, spec.case, schedule, spec.R, spec.K)
            cor_bound = corollary_bound(spec.method, spec.case, spec.regime, params)
            violations = schedule_violations(schedule, params)
            for issue in violations:
                logger.warning(f"Schedule violates a theorem condition: {issue}")

        seeds = list(range(spec.base_seed, spec.base_seed + spec.n_seeds))
        n_jobs = min(resolve_threads(spec.threads), len(seeds))
        logger.info(
            f"Running {spec.method.value}/{spec.case.value} on {spec.problem.name} "
            f"for {len(seeds)} seeds, K={spec.K}, {n_jobs} worker(s)"
        )

        start = time.perf_counter()
        outcomes = self.run_seeds(spec, schedule, seeds, n_jobs)
        wall_time = time.perf_counter() - start

        values = [o.metric_value for o in outcomes]
        quantile_levels = sorted({0.5, 0.9, 1.0 - spec.beta})
        report = ExperimentReport(
            metric=spec.metric.value,
            per_seed_metric=values,
            seeds=seeds,
            diverged=[o.diverged for o in outcomes],
            bound=bound,
            success_fraction=success_fraction(values, bound),
            quantiles={q: empirical_quantile(values, q) for q in quantile_levels},
            n_diverged=sum(o.diverged for o in outcomes),
            oracle_calls_per_seed=schedule.total_oracle_calls(),
            wall_time=wall_time,
            radius=float(spec.R),
            beta=spec.beta,
            corollary_bound=cor_bound,
            schedule=schedule.to_dict(),
            violations=violations,
            curves={o.seed: o.curve for o in outcomes if o.curve},
            oracle_calls=[o.oracle_calls for o in outcomes],
            gap_unconverged=[o.seed for o in outcomes if not o.gap_converged],
        )

        if report.n_diverged:
            logger.warning(f"{report.n_diverged} of {len(seeds)} seeds diverged")
        if report.gap_unconverged:
            logger.warning(
                f"Gap solver hit its iteration cap for seeds {report.gap_unconverged}; "
                "their metric values are flagged in the report"
            )
        logger.info(
            f"Experiment finished in {wall_time:.2f}s: success fraction "
            f"{report.success_fraction:.3f} against bound {bound:.6g}"
        )
        return report

    def compare_methods(self, spec_a: ExperimentSpec, spec_b: ExperimentSpec) -> MethodComparison:
        """Paired medians of the final metric for two methods on the same instance and budget"""
        if not spec_a.problem.same_instance(spec_b.problem):
            raise InvalidParameterError("compared specs must share the problem")
        if spec_a.noise != spec_b.noise:
            raise InvalidParameterError("compared specs must share the noise model")
        if not np.array_equal(spec_a.x0, spec_b.x0):
            raise InvalidParameterError("compared specs must share x0")
        if spec_a.metric is not spec_b.metric:
            raise InvalidParameterError("compared specs must use the same metric")
        budget_a = self.resolve_schedule(spec_a).total_oracle_calls()
        budget_b = self.resolve_schedule(spec_b).total_oracle_calls()
        if budget_a != budget_b:
            raise InvalidParameterError(f"oracle budgets differ: {budget_a} vs {budget_b}")

        report_a = self.run_experiment(spec_a)
        report_b = self.run_experiment(spec_b)
        return MethodComparison(
            median_a=empirical_quantile(report_a.per_seed_metric, 0.5),
            median_b=empirical_quantile(report_b.per_seed_metric, 0.5),
            diverged_a=report_a.n_diverged,
            diverged_b=report_b.n_diverged,
        )


# Create a singleton instance
experiment_runner = ExperimentRunner()
run_experiment = experiment_runner.run_experiment
compare_methods = experiment_runner.compare_methods
