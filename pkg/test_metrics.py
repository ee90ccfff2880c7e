"""
Tests for the restricted gap, the averaged squared operator norm and the distance metric
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vipclip.errors import InvalidParameterError, NotMonotoneError
from vipclip.models.noise import NoiseModel
from vipclip.models.problem import AffineProblem
from vipclip.models.trajectory import Trajectory
from vipclip.services.metrics import (
    avg_sq_operator_norm,
    dist_sq,
    gap_bruteforce,
    gap_restricted,
)
from vipclip.services.problems import make_bilinear, make_strongly_monotone, make_weak_minty
from vipclip.services.schedules import custom_sgda_schedule
from vipclip.services.solvers import run_solver


def identity_problem(d=2, shift=None):
    shift = np.zeros(d) if shift is None else np.asarray(shift, dtype=float)
    return AffineProblem(np.eye(d), -shift, shift, lipschitz=1.0, qsm_mu=1.0, sc_ell=1.0)


def test_gap_at_the_solution_of_identity():
    result = gap_restricted(identity_problem(), np.zeros(2), 1.0)
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert_allclose(result.maximizer, np.zeros(2), atol=1e-12)
    assert result.converged


def test_gap_interior_maximizer():
    x = np.array([0.6, 0.8])
    result = gap_restricted(identity_problem(), x, 1.0)
    assert result.value == pytest.approx(0.25, abs=1e-8)
    assert_allclose(result.maximizer, x / 2, atol=1e-6)
    assert result.radius == 1.0


def test_gap_boundary_maximizer():
    # Unconstrained maximizer x/2 = (2, 0) lies outside B_1(0); the best feasible point is (1, 0)
    result = gap_restricted(identity_problem(), np.array([4.0, 0.0]), 1.0)
    assert result.value == pytest.approx(3.0, abs=1e-8)
    assert_allclose(result.maximizer, [1.0, 0.0], atol=1e-6)


def test_gap_is_translation_invariant():
    x = np.array([0.3, -0.7])
    shift = np.array([5.0, -2.0])
    base = gap_restricted(identity_problem(), x, 2.0).value
    moved = gap_restricted(identity_problem(shift=shift), x + shift, 2.0).value
    assert moved == pytest.approx(base, rel=1e-6)


@pytest.mark.parametrize("problem", [
    make_strongly_monotone(4, 0.5, 3.0, seed=7),
    make_bilinear(2, 1.5),
])
def test_gap_is_nonnegative_and_vanishes_at_the_solution(problem):
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = problem.solution + rng.standard_normal(problem.dimension)
        assert gap_restricted(problem, x, 1.5).value >= -1e-12
    assert gap_restricted(problem, problem.solution, 1.5).value == pytest.approx(0.0, abs=1e-8)


def test_gap_grows_with_the_radius():
    problem = make_strongly_monotone(4, 0.5, 3.0, seed=7)
    x = problem.solution + 0.5
    values = [gap_restricted(problem, x, r).value for r in (0.5, 1.0, 2.0)]
    assert values[0] <= values[1] + 1e-10 <= values[2] + 2e-10


def test_bilinear_gap_is_linear_in_u():
    problem = make_bilinear(2, 1.5)
    x = problem.solution + np.array([1.0, 0.0, 0.0, 0.0])
    result = gap_restricted(problem, x, 1.0)
    # g(u) = <b, x - u> + <A u, x> is linear, so the maximum sits on the sphere
    assert np.linalg.norm(result.maximizer - problem.solution) == pytest.approx(1.0, rel=1e-9)
    assert result.value > 0


def test_bruteforce_closed_form():
    value = gap_bruteforce(identity_problem(), np.array([1.0, 0.0]), 1.0, 100_000, seed=0)
    assert value == pytest.approx(0.25, abs=1e-3)
    assert gap_bruteforce(identity_problem(), np.zeros(2), 1.0, 1000, seed=0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bruteforce_is_a_lower_bound(seed):
    rng = np.random.default_rng(seed)
    for problem in (make_strongly_monotone(4, 0.5, 3.0, seed=seed), make_bilinear(2, 1.0)):
        x = problem.solution + rng.standard_normal(problem.dimension)
        exact = gap_restricted(problem, x, 1.0)
        lower = gap_bruteforce(problem, x, 1.0, 20_000, seed=seed)
        assert lower <= exact.value + 1e-8
        assert lower >= exact.value - 0.05 * max(1.0, abs(exact.value))


def test_gap_rejects_non_monotone_operators():
    with pytest.raises(NotMonotoneError):
        gap_restricted(make_weak_minty(0.5), np.ones(2), 1.0)


def test_gap_rejects_bad_inputs():
    with pytest.raises(InvalidParameterError):
        gap_restricted(identity_problem(), np.array([math.nan, 0.0]), 1.0)
    with pytest.raises(InvalidParameterError):
        gap_restricted(identity_problem(), np.zeros(2), 0.0)
    with pytest.raises(InvalidParameterError):
        gap_bruteforce(identity_problem(), np.zeros(2), 1.0, 0, seed=0)


def test_avg_sq_norm_hand_example():
    problem = identity_problem(1)
    traj = Trajectory(method="SGDA", dimension=1, iterates=np.array([[1.0], [0.5], [0.25]]), steps_completed=2)
    assert avg_sq_operator_norm(traj, problem) == pytest.approx(0.625)


def test_avg_sq_norm_at_the_solution():
    problem = make_strongly_monotone(2, 1.0, 2.0, seed=0)
    schedule = custom_sgda_schedule(0.1, 1.0, 1, 9)
    traj = run_solver(problem, NoiseModel.none(), "ClippedSGDA", schedule, problem.solution, seed=0)
    assert avg_sq_operator_norm(traj, problem) == pytest.approx(0.0, abs=1e-20)


def test_avg_sq_norm_without_stored_iterates():
    problem = make_strongly_monotone(2, 1.0, 2.0, seed=0)
    schedule = custom_sgda_schedule(0.1, 1.0, 1, 30)
    x0 = problem.solution + 1.0
    kept = run_solver(problem, NoiseModel.gaussian(0.3), "ClippedSGDA", schedule, x0, seed=3)
    light = run_solver(problem, NoiseModel.gaussian(0.3), "ClippedSGDA", schedule, x0, seed=3,
                       record_iterates=False)
    assert light.iterates is None
    assert avg_sq_operator_norm(light, problem) == pytest.approx(avg_sq_operator_norm(kept, problem), rel=1e-12)


def test_avg_sq_norm_needs_iterations():
    with pytest.raises(InvalidParameterError):
        avg_sq_operator_norm(Trajectory(method="SEG", dimension=1), identity_problem(1))


def test_dist_sq():
    assert dist_sq(np.array([3.0, 4.0]), identity_problem()) == 25.0
    problem = identity_problem(shift=[1.0, 1.0])
    assert dist_sq(problem.solution, problem) == 0.0
