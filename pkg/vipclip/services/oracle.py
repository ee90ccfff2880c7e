"""
Stochastic first-order oracle: F_xi(x) = F(x) + xi with additive noise, mini-batch
means, the clip operator and Monte-Carlo statistics of the clipped estimator.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import List, Optional, Tuple, Union

import numpy as np

from ..config import LEMMA_SE_MARGIN, MIN_ESTIMATOR_TRIALS, NOISE_CHUNK_SIZE
from ..errors import InvalidParameterError, PreconditionError
from ..models.noise import EstimatorStats, LemmaCheck, NoiseKind, NoiseModel
from ..models.problem import AffineProblem
from ..utils.rng import RandomStreams

logger = logging.getLogger(__name__)

Shape = Union[int, Tuple[int, ...]]


class NoiseSamplerBase(ABC):
    """Base class for unit-variance, zero-mean coordinate samplers"""

    @abstractmethod
    def base_draw(self, rng: np.random.Generator, shape: Shape) -> np.ndarray:
        """I.i.d. draws with mean 0 and variance 1"""
        pass


class SilentSampler(NoiseSamplerBase):
    def base_draw(self, rng, shape):
        return np.zeros(shape)


class GaussianSampler(NoiseSamplerBase):
    def base_draw(self, rng, shape):
        return rng.standard_normal(shape)


class StudentTSampler(NoiseSamplerBase):
    def __init__(self, nu: float):
        self.nu = nu
        self.scale = math.sqrt((nu - 2.0) / nu)

    def base_draw(self, rng, shape):
        return rng.standard_t(self.nu, size=shape) * self.scale


class SymmetricParetoSampler(NoiseSamplerBase):
    """
    Classic Pareto(alpha) with x_m = 1, centered and scaled to unit variance, times an
    independent random sign so both tails are heavy.
    """

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.mean = alpha / (alpha - 1.0)
        # Var = alpha / ((alpha - 1)^2 (alpha - 2))
        self.scale = (alpha - 1.0) * math.sqrt((alpha - 2.0) / alpha)

    def base_draw(self, rng, shape):
        # numpy's pareto is the Lomax law, i.e. classic Pareto minus one
        draws = (rng.pareto(self.alpha, size=shape) + 1.0 - self.mean) * self.scale
        signs = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        return draws * signs


class BernoulliSpikeSampler(NoiseSamplerBase):
    """+M or -M with probability p/2 each, 0 otherwise; M = 1/sqrt(p)"""

    def __init__(self, p_spike: float):
        self.p_spike = p_spike
        self.magnitude = 1.0 / math.sqrt(p_spike)

    def base_draw(self, rng, shape):
        u = rng.random(shape)
        out = np.zeros_like(u)
        out[u < 0.5 * self.p_spike] = self.magnitude
        out[(u >= 0.5 * self.p_spike) & (u < self.p_spike)] = -self.magnitude
        return out


class NoiseSamplerFactory:
    """Factory for creating coordinate samplers"""

    @staticmethod
    def create_sampler(model: NoiseModel) -> NoiseSamplerBase:
        if model.kind is NoiseKind.NONE:
            return SilentSampler()
        if model.kind is NoiseKind.GAUSSIAN:
            return GaussianSampler()
        if model.kind is NoiseKind.STUDENT_T:
            return StudentTSampler(model.nu)
        if model.kind is NoiseKind.SYMMETRIC_PARETO:
            return SymmetricParetoSampler(model.alpha)
        if model.kind is NoiseKind.BERNOULLI_SPIKE:
            return BernoulliSpikeSampler(model.p_spike)
        raise InvalidParameterError(f"unknown noise kind: {model.kind}")


def sample_noise(model: NoiseModel, d: int, rng: np.random.Generator,
                 size: Optional[int] = None) -> np.ndarray:
    """
    One d-vector of noise (or a (size, d) batch) with per-coordinate std sigma/sqrt(d).
    Rows are drawn sample by sample, coordinates within a sample in order.
    """
    if d <= 0:
        raise InvalidParameterError(f"d must be positive, got {d}")
    shape = (d,) if size is None else (size, d)
    if model.kind is NoiseKind.NONE:
        return np.zeros(shape)
    sampler = NoiseSamplerFactory.create_sampler(model)
    return sampler.base_draw(rng, shape) * (model.sigma / math.sqrt(d))


def batch_mean(problem: AffineProblem, model: NoiseModel, x, m: int,
               rng: np.random.Generator) -> np.ndarray:
    """F(x) + (1/m) sum_i xi_i"""
    if m < 1:
        raise InvalidParameterError(f"batch size must be at least 1, got {m}")
    fx = problem.evaluate(x)
    if model.is_silent:
        return fx
    draws = sample_noise(model, problem.dimension, rng, size=int(m))
    return fx + draws.mean(axis=0)


def clip(y: np.ndarray, lam: float) -> np.ndarray:
    """min{1, lam/||y||} * y, with clip(0, lam) = 0; lam = inf bypasses clipping"""
    if math.isinf(lam):
        return y
    if not lam > 0:
        raise InvalidParameterError(f"clipping level must be positive, got {lam}")
    norm = float(np.linalg.norm(y))
    if norm <= lam:
        return y
    return (lam / norm) * y


def clip_rows(rows: np.ndarray, lam: float) -> np.ndarray:
    """Row-wise clip of an (n, d) array"""
    if math.isinf(lam):
        return rows
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    scale = np.ones_like(norms)
    over = norms > lam
    scale[over] = lam / norms[over]
    return rows * scale


def clipped_estimate(problem: AffineProblem, model: NoiseModel, x, m: int, lam: float,
                     rng: np.random.Generator) -> np.ndarray:
    return clip(batch_mean(problem, model, x, m, rng), lam)


def estimator_stats(problem: AffineProblem, model: NoiseModel, x, m: int, lam: float,
                    n_trials: int, seed: int) -> EstimatorStats:
    """
    Monte-Carlo moments of clip(batch_mean(x, m), lam) over n_trials independent
    estimates. Valid only when ||F(x)|| <= lam / 2.
    """
    if n_trials < MIN_ESTIMATOR_TRIALS:
        raise InvalidParameterError(f"n_trials must be at least {MIN_ESTIMATOR_TRIALS}, got {n_trials}")
    if m < 1 or not lam > 0:
        raise InvalidParameterError("need m >= 1 and lam > 0")
    fx = problem.evaluate(x)
    fx_norm = float(np.linalg.norm(fx))
    if fx_norm > lam / 2:
        raise PreconditionError(
            f"||F(x)|| = {fx_norm:.6g} exceeds lam/2 = {lam / 2:.6g}; "
            "the clipped-estimator bounds do not apply"
        )

    sigma_eff_sq = model.variance / m
    if model.is_silent:
        return EstimatorStats(0.0, 0.0, 0.0, 0.0, int(n_trials), sigma_eff_sq)

    d = problem.dimension
    streams = RandomStreams(seed)
    chunks: List[np.ndarray] = []
    for chunk, start in enumerate(range(0, n_trials, NOISE_CHUNK_SIZE)):
        size = min(NOISE_CHUNK_SIZE, n_trials - start)
        rng = streams.at(chunk)
        draws = sample_noise(model, d, rng, size=size * m).reshape(size, m, d)
        chunks.append(clip_rows(fx + draws.mean(axis=1), lam))
    clipped = np.concatenate(chunks)

    mean = clipped.mean(axis=0)
    about_f = np.einsum("ij,ij->i", clipped - fx, clipped - fx)
    deviations = np.linalg.norm(clipped - mean, axis=1)
    centered = float(np.mean(deviations ** 2))

    stats = EstimatorStats(
        bias_norm=float(np.linalg.norm(mean - fx)),
        second_moment=float(np.mean(about_f)),
        centered_second_moment=centered,
        max_dev=float(np.max(deviations)),
        n_trials=int(n_trials),
        sigma_eff_sq=sigma_eff_sq,
        bias_se=math.sqrt(centered / n_trials),
        second_moment_se=float(np.std(about_f) / math.sqrt(n_trials)),
    )
    logger.info(
        f"Estimator stats ({model.kind.value}, m={m}, lam={lam}): bias {stats.bias_norm:.3e}, "
        f"second moment {stats.second_moment:.3e}, max dev {stats.max_dev:.3e}"
    )
    return stats


def lemma_checks(stats: EstimatorStats, lam: float, n_se: float = LEMMA_SE_MARGIN) -> List[LemmaCheck]:
    """The three ceilings of the clipped-estimator lemma with Monte-Carlo margins"""
    sigma_sq = stats.sigma_eff_sq
    return [
        LemmaCheck("max_dev", stats.max_dev, 2.0 * lam * (1.0 + 1e-9)),
        LemmaCheck("bias_norm", stats.bias_norm, 4.0 * sigma_sq / lam + n_se * stats.bias_se),
        LemmaCheck("second_moment", stats.second_moment, 18.0 * sigma_sq + n_se * stats.second_moment_se),
    ]
