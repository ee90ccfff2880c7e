"""
Tests for the quartile tail diagnostics and the noise-norm samplers
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from vipclip.config import P_ER_NORMAL, P_MR_NORMAL
from vipclip.errors import InvalidParameterError
from vipclip.models.noise import NoiseModel
from vipclip.models.problem import AffineProblem
from vipclip.services.tails import (
    f_lambda,
    histogram,
    noise_norm_samples,
    noise_norm_samples_along,
    quartiles,
    tail_report,
)


def scalar_problem():
    return AffineProblem([[1.0]], [0.0], [0.0], lipschitz=1.0)


def test_quartiles_linear_interpolation():
    assert quartiles([1, 2, 3, 4, 5]) == (2.0, 3.0, 4.0)
    assert quartiles([5, 1, 4, 2, 3]) == (2.0, 3.0, 4.0)
    assert quartiles([1, 2, 3, 4]) == (1.75, 2.5, 3.25)
    assert quartiles([7.5] * 9) == (7.5, 7.5, 7.5)
    assert quartiles([-3.0]) == (-3.0, -3.0, -3.0)


def test_quartiles_need_samples():
    with pytest.raises(InvalidParameterError):
        quartiles([])


def test_f_lambda_edge_cases():
    assert f_lambda([2.0] * 10, 1.5) == 0.0
    assert f_lambda(np.arange(100.0), 1e9) == 0.0
    assert f_lambda([0, 0, 0, 0, 100], 1.5) == pytest.approx(0.2)
    with pytest.raises(InvalidParameterError):
        f_lambda([1.0, 2.0, 3.0], 1.5)
    with pytest.raises(InvalidParameterError):
        f_lambda([1.0, 2.0, 3.0, 4.0], 0.0)


def test_f_lambda_is_nonincreasing_in_lambda():
    samples = np.random.default_rng(0).standard_t(3, 5000)
    values = [f_lambda(samples, lam) for lam in (0.5, 1.0, 1.5, 3.0, 6.0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_normal_reference_fractions():
    samples = np.random.default_rng(1).standard_normal(1_000_000)
    assert f_lambda(samples, 1.5) == pytest.approx(0.0035, abs=5e-4)
    report = tail_report(samples)
    assert 0.85 <= report.rho_mr <= 1.15
    assert report.n == 1_000_000


def test_student_t_is_heavy_tailed():
    samples = np.random.default_rng(2).standard_t(3, 1_000_000)
    report = tail_report(samples)
    assert report.rho_mr >= 5
    assert report.p_er > 0


def test_tail_report_fields():
    samples = np.random.default_rng(3).lognormal(size=10_000)
    report = tail_report(samples)
    assert report.q1 <= report.q2 <= report.q3
    assert report.p_er <= report.p_mr
    assert report.rho_mr == report.p_mr / P_MR_NORMAL
    assert report.rho_er == report.p_er / P_ER_NORMAL
    assert set(report.to_dict()) == {"q1", "q2", "q3", "p_mr", "p_er", "rho_mr", "rho_er", "n"}


def test_tail_report_needs_enough_samples():
    with pytest.raises(InvalidParameterError):
        tail_report(np.ones(99))


def test_tail_report_invariances():
    rng = np.random.default_rng(4)
    samples = rng.standard_t(4, 2000)
    base = tail_report(samples)
    shuffled = tail_report(rng.permutation(samples))
    assert (shuffled.p_mr, shuffled.p_er) == (base.p_mr, base.p_er)
    assert_allclose([shuffled.q1, shuffled.q2, shuffled.q3], [base.q1, base.q2, base.q3])
    scaled = tail_report(3.0 * samples - 2.0)
    assert (scaled.p_mr, scaled.p_er) == (base.p_mr, base.p_er)
    assert scaled.q3 == pytest.approx(3.0 * base.q3 - 2.0)


def test_histogram_examples():
    hist = histogram([0.0, 1.0], 2)
    assert_array_equal(hist.counts, [1, 1])
    assert_allclose(hist.edges, [0.0, 0.5, 1.0])
    assert list(hist.rows()) == [(0.0, 0.5, 1), (0.5, 1.0, 1)]

    flat = histogram([2.0] * 7, 5)
    assert flat.total == 7
    assert np.count_nonzero(flat.counts) == 1


def test_histogram_conserves_counts():
    samples = np.random.default_rng(5).pareto(2.5, 12_345)
    hist = histogram(samples, 50)
    assert hist.total == 12_345
    assert len(hist.edges) == 51
    assert hist.edges[0] == samples.min() and hist.edges[-1] == samples.max()


def test_histogram_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        histogram([], 3)
    with pytest.raises(InvalidParameterError):
        histogram([1.0], 0)


def test_silent_noise_norms_are_zero():
    assert_array_equal(noise_norm_samples(scalar_problem(), NoiseModel.none(), [1.0], 50, 4, seed=0), np.zeros(50))


def test_gaussian_noise_norms_are_half_normal():
    norms = noise_norm_samples(scalar_problem(), NoiseModel.gaussian(1.0), [0.0], 200_000, 1, seed=0)
    assert norms.shape == (200_000,)
    assert norms.mean() == pytest.approx(math.sqrt(2 / math.pi), abs=0.01)

    batched = noise_norm_samples(scalar_problem(), NoiseModel.gaussian(1.0), [0.0], 200_000, 16, seed=0)
    assert batched.mean() == pytest.approx(norms.mean() / 4, rel=0.03)


def test_noise_norms_are_seeded():
    model = NoiseModel.student_t(1.0, nu=3.0)
    a = noise_norm_samples(scalar_problem(), model, [0.0], 25_000, 2, seed=8)
    b = noise_norm_samples(scalar_problem(), model, [0.0], 25_000, 2, seed=8)
    assert_array_equal(a, b)
    assert not np.array_equal(a, noise_norm_samples(scalar_problem(), model, [0.0], 25_000, 2, seed=9))


def test_noise_norms_along_a_path():
    points = [[0.0], [1.0], [2.0]]
    norms = noise_norm_samples_along(scalar_problem(), NoiseModel.gaussian(1.0), points, 1000, 1, seed=0)
    assert norms.shape == (3000,)
    assert not np.array_equal(norms[:1000], norms[1000:2000])
    with pytest.raises(InvalidParameterError):
        noise_norm_samples_along(scalar_problem(), NoiseModel.gaussian(1.0), [], 10, 1, seed=0)
