"""
Clipped stochastic extragradient and clipped stochastic gradient descent-ascent.

The unclipped SEG and SGDA baselines are the same loops with every clipping
level replaced by +inf, which bypasses the clip operator entirely.
"""

import logging
import math
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from ..errors import InvalidParameterError
from ..models.noise import NoiseModel
from ..models.problem import AffineProblem
from ..models.schedule import Method, Schedule, SegSchedule, SgdaSchedule
from ..models.trajectory import Trajectory
from ..utils.rng import EXTRAPOLATION, SINGLE, UPDATE, RandomStreams
from .oracle import clipped_estimate

logger = logging.getLogger(__name__)


def _check_index(schedule: Schedule, k: int) -> None:
    if not 0 <= k < schedule.iterations:
        raise InvalidParameterError(f"iteration {k} outside [0, {schedule.iterations})")


def seg_step(problem: AffineProblem, model: NoiseModel, x: np.ndarray, schedule: SegSchedule,
             k: int, streams: RandomStreams, clipped: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    x~     = x - gamma1 * clip(batch_mean(x, m1(k)), lambda1(k))
    x_next = x - gamma2 * clip(batch_mean(x~, m2(k)), lambda2(k))
    """
    _check_index(schedule, k)
    lam1 = schedule.lambda1(k) if clipped else math.inf
    lam2 = schedule.lambda2(k) if clipped else math.inf

    g1 = clipped_estimate(problem, model, x, schedule.m1.as_batch(k), lam1, streams.at(k, EXTRAPOLATION))
    x_tilde = x - schedule.gamma1 * g1
    g2 = clipped_estimate(problem, model, x_tilde, schedule.m2.as_batch(k), lam2, streams.at(k, UPDATE))
    x_next = x - schedule.gamma2 * g2
    return x_next, x_tilde


def sgda_step(problem: AffineProblem, model: NoiseModel, x: np.ndarray, schedule: SgdaSchedule,
              k: int, streams: RandomStreams, clipped: bool = True) -> np.ndarray:
    """x_next = x - gamma * clip(batch_mean(x, m(k)), lambda(k))"""
    _check_index(schedule, k)
    lam = schedule.lam(k) if clipped else math.inf
    g = clipped_estimate(problem, model, x, schedule.m.as_batch(k), lam, streams.at(k, SINGLE))
    return x - schedule.gamma * g


def _finite(*arrays: np.ndarray) -> bool:
    return all(bool(np.all(np.isfinite(a))) for a in arrays)


def run_solver(problem: AffineProblem, model: NoiseModel, method: Union[str, Method],
               schedule: Schedule, x0, seed: int, record_iterates: bool = True,
               checkpoints: Optional[Iterable[int]] = None) -> Trajectory:
    """
    Run K+1 iterations of the method from x0.

    checkpoints lists iteration counts n at which the running average of the first
    n averaged points (x~ for SEG, x for SGDA) is kept, for anytime curves.
    A non-finite value stops the run; the partial trajectory is returned with
    diverged set.
    """
    method = Method(method)
    if method.is_extragradient != isinstance(schedule, SegSchedule):
        raise InvalidParameterError(
            f"method {method.value} needs a {'SEG' if method.is_extragradient else 'SGDA'} schedule"
        )
    x = problem.check_point(x0).copy()
    if not _finite(x):
        raise InvalidParameterError("x0 must be finite")

    clipped = method.is_clipped
    n_iter = schedule.iterations
    d = problem.dimension
    x_star = problem.solution
    wanted = set(int(c) for c in checkpoints) if checkpoints is not None else set()
    streams = RandomStreams(seed)

    iterates = np.empty((n_iter + 1, d)) if record_iterates else None
    extrapolations = np.empty((n_iter, d)) if record_iterates and method.is_extragradient else None
    sq_norms = np.empty(n_iter)
    dists = np.empty(n_iter + 1)
    tilde_sum = np.zeros(d)
    iterate_sum = np.zeros(d)
    traj = Trajectory(method=method.value, dimension=d)

    if iterates is not None:
        iterates[0] = x
    dists[0] = float(np.sum((x - x_star) ** 2))

    steps = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_iter):
            fx = problem.evaluate(x)
            sq_norms[k] = float(fx @ fx)
            iterate_sum += x
            if method.is_extragradient:
                x_next, x_tilde = seg_step(problem, model, x, schedule, k, streams, clipped)
                traj.oracle_calls += schedule.m1.as_batch(k) + schedule.m2.as_batch(k)
                tilde_sum += x_tilde
                if extrapolations is not None:
                    extrapolations[k] = x_tilde
                ok = _finite(x_next, x_tilde, sq_norms[k:k + 1])
            else:
                x_next = sgda_step(problem, model, x, schedule, k, streams, clipped)
                traj.oracle_calls += schedule.m.as_batch(k)
                ok = _finite(x_next, sq_norms[k:k + 1])

            steps = k + 1
            if not ok:
                traj.diverged, traj.diverged_at = True, k
                logger.warning(f"{method.value} run (seed {seed}) produced a non-finite value at k={k}")
                break

            x = x_next
            if iterates is not None:
                iterates[k + 1] = x
            dists[k + 1] = float(np.sum((x - x_star) ** 2))
            if steps in wanted:
                running = tilde_sum if method.is_extragradient else iterate_sum
                traj.checkpoints[steps] = running / steps

    traj.steps_completed = steps
    traj.sq_norm_history = sq_norms[:steps].copy()
    traj.sq_norm_sum = float(np.sum(traj.sq_norm_history))
    traj.dist_sq_history = dists[:steps + 1].copy() if not traj.diverged else dists[:steps].copy()
    traj.final_iterate = x.copy()
    if steps:
        traj.avg_iterate = iterate_sum / steps
        if method.is_extragradient:
            traj.avg_extrapolation = tilde_sum / steps
    if iterates is not None:
        stored = steps + 1 if not traj.diverged else steps
        traj.iterates = iterates[:stored].copy()
        if extrapolations is not None:
            traj.extrapolations = extrapolations[:steps].copy()
    return traj
