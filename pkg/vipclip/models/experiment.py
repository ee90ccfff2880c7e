from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..config import DEFAULT_N_SEEDS
from ..errors import InvalidParameterError
from .noise import NoiseModel
from .problem import AffineProblem
from .schedule import (
    Case,
    Method,
    Regime,
    Schedule,
    ScheduleParams,
    SegCase,
    SegSchedule,
    SgdaCase,
    parse_case,
)


class Metric(str, Enum):
    GAP = "Gap"
    AVG_SQ_NORM = "AvgSqNorm"
    DIST_SQ = "DistSq"


# Metric each guarantee is stated for
CASE_METRIC: Dict[Case, Metric] = {
    SegCase.MONOTONE: Metric.GAP,
    SgdaCase.MONOTONE_SC: Metric.GAP,
    SegCase.WEAK_MINTY: Metric.AVG_SQ_NORM,
    SgdaCase.SC: Metric.AVG_SQ_NORM,
    SegCase.QSM: Metric.DIST_SQ,
    SgdaCase.QSM_SC: Metric.DIST_SQ,
}


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """
    One Monte-Carlo verification: problem, noise, method and schedule case, fanned
    out over seeds base_seed .. base_seed + n_seeds - 1.

    Theorem cases build their schedule from the problem constants; the Custom
    case takes an explicit schedule. R defaults to ||x0 - x*||.
    """
    problem: AffineProblem
    noise: NoiseModel
    method: Method
    case: Case
    x0: np.ndarray
    K: int
    regime: Optional[Regime] = Regime.LARGE_STEP
    schedule: Optional[Schedule] = None
    n_seeds: int = DEFAULT_N_SEEDS
    base_seed: int = 0
    beta: float = 0.1
    metric: Optional[Metric] = None
    R: Optional[float] = None
    record_curves: bool = False
    threads: Optional[int] = None

    def __post_init__(self):
        def set_(name, value):
            object.__setattr__(self, name, value)

        set_("method", Method(self.method))
        case = parse_case(self.case)
        if case.value == "Custom":
            case = SegCase.CUSTOM if self.method.is_extragradient else SgdaCase.CUSTOM
        set_("case", case)
        set_("regime", Regime(self.regime) if self.regime is not None else None)
        set_("x0", self.problem.check_point(self.x0).copy())
        if not np.all(np.isfinite(self.x0)):
            raise InvalidParameterError("x0 must be finite")

        if self.method.is_extragradient != isinstance(self.case, SegCase):
            raise InvalidParameterError(f"method {self.method.value} cannot use case {self.case.value}")

        if self.metric is None:
            if self.is_custom:
                raise InvalidParameterError("a Custom case needs an explicit metric")
            set_("metric", CASE_METRIC[self.case])
        set_("metric", Metric(self.metric))
        if not self.is_custom and CASE_METRIC[self.case] is not self.metric:
            raise InvalidParameterError(
                f"case {self.case.value} is stated for metric {CASE_METRIC[self.case].value}, "
                f"got {self.metric.value}"
            )

        if self.is_custom:
            if self.schedule is None:
                raise InvalidParameterError("a Custom case needs an explicit schedule")
            if isinstance(self.schedule, SegSchedule) != self.method.is_extragradient:
                raise InvalidParameterError("schedule family does not match the method")
        if self.schedule is not None and self.schedule.horizon != self.K:
            raise InvalidParameterError(f"schedule horizon {self.schedule.horizon} differs from K={self.K}")

        distance = self.initial_distance
        if self.R is None:
            if distance == 0:
                raise InvalidParameterError("x0 equals x*; pass R explicitly")
            set_("R", distance)
        elif not self.R > 0 or self.R < distance * (1 - 1e-12):
            raise InvalidParameterError(f"R = {self.R} must be positive and at least ||x0 - x*|| = {distance:.6g}")

        if self.K < 0:
            raise InvalidParameterError(f"K must be nonnegative, got {self.K}")
        if self.n_seeds < 1:
            raise InvalidParameterError(f"n_seeds must be positive, got {self.n_seeds}")
        if self.base_seed < 0:
            raise InvalidParameterError(f"base_seed must be nonnegative, got {self.base_seed}")
        if not 0 < self.beta <= 1:
            raise InvalidParameterError(f"beta must lie in (0, 1], got {self.beta}")

    @property
    def is_custom(self) -> bool:
        return self.case.value == "Custom"

    @property
    def initial_distance(self) -> float:
        return float(np.linalg.norm(self.x0 - self.problem.solution))

    def schedule_params(self) -> ScheduleParams:
        return ScheduleParams(
            R=float(self.R),
            K=int(self.K),
            beta=float(self.beta),
            sigma=self.noise.sigma if not self.noise.is_silent else 0.0,
            L=self.problem.lipschitz,
            mu=self.problem.qsm_mu,
            rho=self.problem.snc_rho or 0.0,
            ell=self.problem.sc_ell,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem": self.problem.to_dict(),
            "noise": self.noise.to_dict(),
            "method": self.method.value,
            "case": self.case.value,
            "regime": self.regime.value if self.regime else None,
            "K": self.K,
            "x0": self.x0.tolist(),
            "n_seeds": self.n_seeds,
            "base_seed": self.base_seed,
            "beta": self.beta,
            "metric": self.metric.value,
            "R": self.R,
        }

