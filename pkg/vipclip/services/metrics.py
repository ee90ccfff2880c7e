"""
Convergence metrics: the restricted gap function, the averaged squared operator
norm along a trajectory and the squared distance to the solution.
"""

import logging
from typing import Optional

import numpy as np

from ..config import GAP_BASE_TOL, GAP_MAX_ITERATIONS, MONOTONE_TOL
from ..errors import InvalidParameterError, NotMonotoneError
from ..models.problem import AffineProblem
from ..models.report import GapResult
from ..models.trajectory import Trajectory
from ..utils.linalg import project_ball, sample_ball, sample_sphere, sym_part
from ..utils.rng import RandomStreams

logger = logging.getLogger(__name__)


def _objective(problem: AffineProblem, x: np.ndarray, u: np.ndarray) -> float:
    """g(u) = <A u + b, x - u>"""
    return float(problem.evaluate(u) @ (x - u))


def _objective_rows(problem: AffineProblem, x: np.ndarray, points: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", problem.evaluate_many(points), x - points)


def _gradient(problem: AffineProblem, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return problem.matrix.T @ (x - u) - problem.evaluate(u)


def _unconstrained_maximizer(problem: AffineProblem, x: np.ndarray) -> np.ndarray:
    # Stationarity of g: (A + A^T) u = A^T x - b
    a = problem.matrix
    rhs = a.T @ x - problem.offset
    return np.linalg.lstsq(a + a.T, rhs, rcond=None)[0]


def default_gap_tol(problem: AffineProblem, x, R: float) -> float:
    distance = float(np.linalg.norm(problem.check_point(x) - problem.solution))
    return GAP_BASE_TOL * (1.0 + distance * problem.lipschitz * R)


def check_monotone(problem: AffineProblem) -> float:
    """Smallest eigenvalue of A + A^T; raises when the operator is not monotone"""
    lam_min = float(np.linalg.eigvalsh(2.0 * sym_part(problem.matrix))[0])
    if lam_min < -MONOTONE_TOL:
        raise NotMonotoneError(
            f"lambda_min(A + A^T) = {lam_min:.3e}; the restricted gap is only a valid "
            "criterion for monotone operators"
        )
    return lam_min


def gap_restricted(problem: AffineProblem, x, R: float, tol: Optional[float] = None) -> GapResult:
    """
    Projected gradient ascent on the concave quadratic g(u) = <A u + b, x - u>
    over the ball B_R(x*), with stepsize 1/Lambda.

    Terminates when the projected-gradient mapping Lambda * ||u+ - u|| drops to
    tol or after the iteration cap; a capped run is returned with converged=False.
    """
    x = problem.check_point(x)
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("gap is undefined at a non-finite point")
    if not R > 0:
        raise InvalidParameterError(f"R must be positive, got {R}")
    check_monotone(problem)
    tol = default_gap_tol(problem, x, R) if tol is None else tol

    a = problem.matrix
    x_star = problem.solution
    big_lambda = float(np.linalg.eigvalsh(a + a.T)[-1]) + float(np.linalg.norm(a, 2)) + 1.0

    # Warm start from the best of a few closed-form candidates
    grad_star = _gradient(problem, x, x_star)
    grad_norm = float(np.linalg.norm(grad_star))
    candidates = [x_star, project_ball(_unconstrained_maximizer(problem, x), x_star, R)]
    if grad_norm > 0:
        candidates.append(x_star + (R / grad_norm) * grad_star)
    u = max(candidates, key=lambda c: _objective(problem, x, c))

    certificate = np.inf
    iterations = 0
    for iterations in range(1, GAP_MAX_ITERATIONS + 1):
        u_next = project_ball(u + _gradient(problem, x, u) / big_lambda, x_star, R)
        certificate = big_lambda * float(np.linalg.norm(u_next - u))
        u = u_next
        if certificate <= tol:
            break

    converged = certificate <= tol
    if not converged:
        logger.warning(
            f"Gap solver stopped at the {GAP_MAX_ITERATIONS}-iteration cap with "
            f"certificate {certificate:.3e} > tol {tol:.3e}"
        )

    value = _objective(problem, x, u)
    if value < _objective(problem, x, x_star):
        u = x_star.copy()
        value = _objective(problem, x, u)

    return GapResult(
        value=value,
        maximizer=u,
        iterations_used=iterations,
        certificate_gap=certificate,
        converged=converged,
        radius=float(R),
    )


def gap_bruteforce(problem: AffineProblem, x, R: float, n_samples: int, seed: int) -> float:
    """
    Lower bound on Gap_R(x) from uniform samples of the ball and of its boundary
    sphere, plus x*, the projected midpoint (x + x*)/2 and the projected
    unconstrained maximizer.
    """
    if n_samples < 1:
        raise InvalidParameterError(f"n_samples must be positive, got {n_samples}")
    x = problem.check_point(x)
    x_star = problem.solution
    streams = RandomStreams(seed)

    points = np.vstack([
        sample_ball(x_star, R, n_samples, streams.at(0)),
        sample_sphere(x_star, R, n_samples, streams.at(1)),
        x_star[None, :],
        project_ball(0.5 * (x + x_star), x_star, R)[None, :],
        project_ball(_unconstrained_maximizer(problem, x), x_star, R)[None, :],
    ])
    return float(np.max(_objective_rows(problem, x, points)))


def avg_sq_operator_norm(trajectory: Trajectory, problem: AffineProblem) -> float:
    """(1/(K+1)) sum_{k=0}^{K} ||F(x^k)||^2"""
    n = trajectory.steps_completed
    if n == 0:
        raise InvalidParameterError("trajectory has no iterations")
    if trajectory.iterates is not None:
        values = problem.evaluate_many(trajectory.iterates[:n])
        return float(np.mean(np.einsum("ij,ij->i", values, values)))
    return trajectory.avg_sq_norm


def dist_sq(x, problem: AffineProblem) -> float:
    """||x - x*||^2"""
    diff = problem.check_point(x) - problem.solution
    return float(diff @ diff)
