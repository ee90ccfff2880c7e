import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Union

import numpy as np

from ..config import SCHEDULE_TABLE_LIMIT
from ..errors import InvalidParameterError


class Method(str, Enum):
    CLIPPED_SEG = "ClippedSEG"
    CLIPPED_SGDA = "ClippedSGDA"
    SEG = "SEG"
    SGDA = "SGDA"

    @property
    def is_extragradient(self) -> bool:
        return self in (Method.CLIPPED_SEG, Method.SEG)

    @property
    def is_clipped(self) -> bool:
        return self in (Method.CLIPPED_SEG, Method.CLIPPED_SGDA)


class SegCase(str, Enum):
    MONOTONE = "Monotone"
    WEAK_MINTY = "WeakMinty"
    QSM = "QSM"
    CUSTOM = "Custom"


class SgdaCase(str, Enum):
    MONOTONE_SC = "MonotoneSC"
    SC = "SC"
    QSM_SC = "QSM_SC"
    CUSTOM = "Custom"


class Regime(str, Enum):
    LARGE_STEP = "LargeStep"
    SMALL_STEP = "SmallStep"


Case = Union[SegCase, SgdaCase]


def parse_case(value: Union[str, Case]) -> Case:
    if isinstance(value, (SegCase, SgdaCase)):
        return value
    for enum in (SegCase, SgdaCase):
        try:
            return enum(value)
        except ValueError:
            continue
    raise InvalidParameterError(f"unknown case '{value}'")


def _encode(value: float) -> Union[float, str]:
    return value if math.isfinite(value) else "inf"


def _decode(value: Union[float, str]) -> float:
    return math.inf if value in ("inf", "Infinity", None) else float(value)


@dataclass(frozen=True)
class StepRule:
    """
    Closed-form per-iteration rule, callable on k (int or array):
      constant:  base
      exp_decay: base * exp(-rate * k)
      exp_batch: max(1, ceil(base * exp(rate * k)))
    """
    kind: str
    base: float
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "exp_decay", "exp_batch"):
            raise InvalidParameterError(f"unknown step rule '{self.kind}'")

    @classmethod
    def constant(cls, value: float) -> "StepRule":
        return cls("constant", float(value))

    def __call__(self, k):
        if self.kind == "constant":
            if np.ndim(k):
                return np.full(np.shape(k), self.base)
            return self.base
        growth = np.exp(self.rate * np.asarray(k, dtype=float))
        if self.kind == "exp_decay":
            value = self.base / growth
        else:
            value = np.maximum(1.0, np.ceil(self.base * growth))
        return value if np.ndim(k) else float(value)

    def as_batch(self, k) -> int:
        return int(max(1, math.ceil(self(k)))) if self.kind == "constant" else int(self(k))

    def table(self, iterations: int) -> np.ndarray:
        return np.asarray(self(np.arange(iterations)), dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.kind, "base": _encode(self.base), "rate": self.rate}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StepRule":
        return cls(data["type"], _decode(data["base"]), float(data.get("rate", 0.0)))


@dataclass(frozen=True)
class ScheduleParams:
    """Problem and run constants a schedule is built from"""
    R: float
    K: int
    beta: float
    sigma: float = 0.0
    L: Optional[float] = None
    mu: float = 0.0
    rho: float = 0.0
    ell: Optional[float] = None

    def __post_init__(self):
        if self.K < 0:
            raise InvalidParameterError(f"K must be nonnegative, got {self.K}")
        if not self.R > 0:
            raise InvalidParameterError(f"R must be positive, got {self.R}")
        if not 0 < self.beta <= 1:
            raise InvalidParameterError(f"beta must lie in (0, 1], got {self.beta}")
        if self.sigma < 0 or self.mu < 0 or self.rho < 0:
            raise InvalidParameterError("sigma, mu and rho must be nonnegative")

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class _ScheduleBase:
    case: Case
    regime: Optional[Regime]
    horizon: int  # K: iterations k = 0..K are executed
    log_factor: float  # A = ln(c (K+1) / beta); nan for custom schedules
    params: Optional[ScheduleParams] = field(default=None, compare=False)

    @property
    def iterations(self) -> int:
        return self.horizon + 1

    def _rules(self) -> Dict[str, StepRule]:
        raise NotImplementedError

    def _header(self) -> Dict[str, Any]:
        return {
            "case": self.case.value,
            "regime": self.regime.value if self.regime else None,
            "K": self.horizon,
            "log_factor": self.log_factor if math.isfinite(self.log_factor) else None,
            "params": self.params.to_dict() if self.params else None,
        }

    def to_dict(self) -> Dict[str, Any]:
        """Descriptors always; resolved per-k tables when the horizon is small"""
        data = self._header()
        rules = self._rules()
        data["rules"] = {name: rule.to_dict() for name, rule in rules.items()}
        if self.iterations <= SCHEDULE_TABLE_LIMIT:
            data["tables"] = {
                name: [_encode(v) for v in rule.table(self.iterations).tolist()]
                for name, rule in rules.items()
            }
        return data


@dataclass(frozen=True)
class SegSchedule(_ScheduleBase):
    gamma1: float = 0.0
    gamma2: float = 0.0
    lambda1: StepRule = StepRule.constant(math.inf)
    lambda2: StepRule = StepRule.constant(math.inf)
    m1: StepRule = StepRule.constant(1)
    m2: StepRule = StepRule.constant(1)

    def _rules(self) -> Dict[str, StepRule]:
        return {"lambda1": self.lambda1, "lambda2": self.lambda2, "m1": self.m1, "m2": self.m2}

    def total_oracle_calls(self) -> int:
        ks = np.arange(self.iterations)
        return int(np.sum(_batch_table(self.m1, ks)) + np.sum(_batch_table(self.m2, ks)))

    def unclipped(self) -> "SegSchedule":
        return replace(self, lambda1=StepRule.constant(math.inf), lambda2=StepRule.constant(math.inf))

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"method_family": "SEG", "gamma1": self.gamma1, "gamma2": self.gamma2})
        return data


@dataclass(frozen=True)
class SgdaSchedule(_ScheduleBase):
    gamma: float = 0.0
    lam: StepRule = StepRule.constant(math.inf)
    m: StepRule = StepRule.constant(1)

    def _rules(self) -> Dict[str, StepRule]:
        return {"lambda": self.lam, "m": self.m}

    def total_oracle_calls(self) -> int:
        return int(np.sum(_batch_table(self.m, np.arange(self.iterations))))

    def unclipped(self) -> "SgdaSchedule":
        return replace(self, lam=StepRule.constant(math.inf))

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"method_family": "SGDA", "gamma": self.gamma})
        return data


Schedule = Union[SegSchedule, SgdaSchedule]


def _batch_table(rule: StepRule, ks: np.ndarray) -> np.ndarray:
    values = np.asarray(rule(ks), dtype=float)
    return np.maximum(1, np.ceil(values)).astype(np.int64)
