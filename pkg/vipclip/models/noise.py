import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from ..errors import InvalidParameterError


class NoiseKind(str, Enum):
    NONE = "None"
    GAUSSIAN = "Gaussian"
    STUDENT_T = "StudentT"
    SYMMETRIC_PARETO = "SymmetricPareto"
    BERNOULLI_SPIKE = "BernoulliSpike"


@dataclass(frozen=True)
class NoiseModel:
    """
    Zero-mean additive noise with E||xi||^2 = sigma^2.

    Each coordinate is sigma / sqrt(d) times a unit-variance base draw; nu, alpha
    and p_spike parametrise the StudentT, SymmetricPareto and BernoulliSpike bases.
    """
    kind: NoiseKind = NoiseKind.NONE
    sigma: float = 0.0
    nu: Optional[float] = None
    alpha: Optional[float] = None
    p_spike: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.sigma < 0:
            raise InvalidParameterError(f"sigma must be nonnegative, got {self.sigma}")
        if self.kind is NoiseKind.STUDENT_T and (self.nu is None or self.nu <= 2):
            raise InvalidParameterError(f"StudentT needs nu > 2 for finite variance, got {self.nu}")
        if self.kind is NoiseKind.SYMMETRIC_PARETO and (self.alpha is None or self.alpha <= 2):
            raise InvalidParameterError(f"SymmetricPareto needs alpha > 2 for finite variance, got {self.alpha}")
        if self.kind is NoiseKind.BERNOULLI_SPIKE and (self.p_spike is None or not 0 < self.p_spike < 1):
            raise InvalidParameterError(f"BernoulliSpike needs p_spike in (0, 1), got {self.p_spike}")

    @property
    def is_silent(self) -> bool:
        return self.kind is NoiseKind.NONE or self.sigma == 0

    @property
    def variance(self) -> float:
        return 0.0 if self.kind is NoiseKind.NONE else self.sigma ** 2

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls(NoiseKind.GAUSSIAN, sigma)

    @classmethod
    def student_t(cls, sigma: float, nu: float) -> "NoiseModel":
        return cls(NoiseKind.STUDENT_T, sigma, nu=nu)

    @classmethod
    def symmetric_pareto(cls, sigma: float, alpha: float) -> "NoiseModel":
        return cls(NoiseKind.SYMMETRIC_PARETO, sigma, alpha=alpha)

    @classmethod
    def bernoulli_spike(cls, sigma: float, p_spike: float) -> "NoiseModel":
        return cls(NoiseKind.BERNOULLI_SPIKE, sigma, p_spike=p_spike)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "sigma": self.sigma}
        for key in ("nu", "alpha", "p_spike"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NoiseModel":
        return cls(
            kind=NoiseKind(data.get("kind", "None")),
            sigma=float(data.get("sigma", 0.0)),
            nu=data.get("nu"),
            alpha=data.get("alpha"),
            p_spike=data.get("p_spike"),
        )


@dataclass(frozen=True)
class EstimatorStats:
    """Monte-Carlo moments of the clipped mini-batch estimator at a fixed point"""
    bias_norm: float
    second_moment: float
    centered_second_moment: float
    max_dev: float
    n_trials: int
    sigma_eff_sq: float
    bias_se: float = 0.0
    second_moment_se: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    value: float
    ceiling: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.ceiling

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "value": self.value, "ceiling": self.ceiling, "passed": self.passed}
