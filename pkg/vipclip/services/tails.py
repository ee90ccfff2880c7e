"""
Quartile-based heavy-tail diagnostics and gradient-noise-norm sampling.

F_lam(X) = P(Q3 + lam * (Q3 - Q1) < X); p_mr = F_1.5 and p_er = F_3, compared
against the values a normal sample produces.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np

from ..config import (
    EXTREME_LAMBDA,
    MILD_LAMBDA,
    MIN_TAIL_SAMPLES,
    NOISE_CHUNK_SIZE,
    P_ER_NORMAL,
    P_MR_NORMAL,
)
from ..errors import InvalidParameterError
from ..models.noise import NoiseModel
from ..models.problem import AffineProblem
from ..models.report import Histogram, TailReport
from ..utils.rng import RandomStreams
from .oracle import sample_noise

logger = logging.getLogger(__name__)


def _as_samples(samples, minimum: int) -> np.ndarray:
    values = np.asarray(samples, dtype=float).reshape(-1)
    if values.size < minimum:
        raise InvalidParameterError(f"need at least {minimum} samples, got {values.size}")
    return values


def linear_quantile(values, q: float, presorted: bool = False) -> float:
    """
    Quantile at h = (n - 1) q with linear interpolation between order statistics.
    +inf entries sit at the top of the order and win any interpolation they touch.
    """
    if not 0 <= q <= 1:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q}")
    ordered = np.asarray(values, dtype=float) if presorted else np.sort(np.asarray(values, dtype=float))
    if ordered.size == 0:
        raise InvalidParameterError("need at least one value")
    if np.isfinite(ordered[-1]):
        return float(np.quantile(ordered, q, method="linear"))
    h = (ordered.size - 1) * q
    lo, hi = math.floor(h), math.ceil(h)
    if lo == hi:
        return float(ordered[lo])
    if math.isinf(ordered[hi]):
        return math.inf
    return float(np.quantile(ordered[lo:hi + 1], h - lo, method="linear"))


def quartiles(samples) -> Tuple[float, float, float]:
    """Linear-interpolation quantiles at h = (n - 1) p for p = 0.25, 0.5, 0.75"""
    values = np.sort(_as_samples(samples, 1))
    return tuple(linear_quantile(values, p, presorted=True) for p in (0.25, 0.5, 0.75))


def f_lambda(samples, lam: float) -> float:
    values = _as_samples(samples, 4)
    if not lam > 0:
        raise InvalidParameterError(f"lam must be positive, got {lam}")
    q1, _, q3 = quartiles(values)
    threshold = q3 + lam * (q3 - q1)
    return float(np.count_nonzero(values > threshold)) / values.size


def tail_report(samples) -> TailReport:
    values = _as_samples(samples, MIN_TAIL_SAMPLES)
    q1, q2, q3 = quartiles(values)
    p_mr = f_lambda(values, MILD_LAMBDA)
    p_er = f_lambda(values, EXTREME_LAMBDA)
    return TailReport(
        q1=q1, q2=q2, q3=q3,
        p_mr=p_mr, p_er=p_er,
        rho_mr=p_mr / P_MR_NORMAL,
        rho_er=p_er / P_ER_NORMAL,
        n=int(values.size),
    )


def _norms_from_stream(model: NoiseModel, d: int, n: int, m: int,
                       streams: RandomStreams, substream: int) -> np.ndarray:
    out = np.empty(n)
    for chunk, start in enumerate(range(0, n, NOISE_CHUNK_SIZE)):
        size = min(NOISE_CHUNK_SIZE, n - start)
        draws = sample_noise(model, d, streams.at(chunk, substream), size=size * m)
        out[start:start + size] = np.linalg.norm(draws.reshape(size, m, d).mean(axis=1), axis=1)
    return out


def noise_norm_samples(problem: AffineProblem, model: NoiseModel, x, n: int, m: int,
                       seed: int) -> np.ndarray:
    """n independent values of ||batch_mean(x, m) - F(x)||"""
    if n < 1 or m < 1:
        raise InvalidParameterError("n and m must be positive")
    problem.check_point(x)
    if model.is_silent:
        return np.zeros(n)
    return _norms_from_stream(model, problem.dimension, n, m, RandomStreams(seed), 1)


def noise_norm_samples_along(problem: AffineProblem, model: NoiseModel, points: Sequence,
                             n_per_point: int, m: int, seed: int) -> np.ndarray:
    """Noise norms sampled at each point of a path; point i uses substream i + 1"""
    if n_per_point < 1 or m < 1:
        raise InvalidParameterError("n_per_point and m must be positive")
    points = [problem.check_point(p) for p in points]
    if not points:
        raise InvalidParameterError("need at least one point")
    if model.is_silent:
        return np.zeros(len(points) * n_per_point)
    streams = RandomStreams(seed)
    return np.concatenate([
        _norms_from_stream(model, problem.dimension, n_per_point, m, streams, i + 1)
        for i in range(len(points))
    ])


def histogram(samples, n_bins: int) -> Histogram:
    """Equal-width bins over [min, max]; the last bin is closed on the right"""
    if n_bins < 1:
        raise InvalidParameterError(f"n_bins must be positive, got {n_bins}")
    values = _as_samples(samples, 1)
    counts, edges = np.histogram(values, bins=n_bins)
    return Histogram(edges=edges.astype(float), counts=counts.astype(np.int64))
