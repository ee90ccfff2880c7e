import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _quantile_key(q: float) -> str:
    return f"{q:.6g}"


@dataclass(frozen=True, eq=False)
class GapResult:
    """Gap_R(x) = max over u in B_R(x*) of <F(u), x - u>"""
    value: float
    maximizer: np.ndarray
    iterations_used: int
    certificate_gap: float
    converged: bool = True
    radius: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "maximizer": self.maximizer.tolist(),
            "iterations_used": self.iterations_used,
            "certificate_gap": self.certificate_gap,
            "converged": self.converged,
            "R": self.radius,
        }


@dataclass(frozen=True)
class TailReport:
    q1: float
    q2: float
    q3: float
    p_mr: float
    p_er: float
    rho_mr: float
    rho_er: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def rows(self):
        """(bin_left, bin_right, count) per bin"""
        for i, count in enumerate(self.counts):
            yield float(self.edges[i]), float(self.edges[i + 1]), int(count)

    def to_dict(self) -> Dict[str, Any]:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist()}


@dataclass
class SeedOutcome:
    """Final metric of one seed, plus its anytime curve when requested"""
    seed: int
    metric_value: float
    diverged: bool
    oracle_calls: int
    gap_converged: bool = True
    curve: List[tuple] = field(default_factory=list)


@dataclass
class ExperimentReport:
    metric: str
    per_seed_metric: List[float]
    seeds: List[int]
    diverged: List[bool]
    bound: float
    success_fraction: float
    quantiles: Dict[float, float]
    n_diverged: int
    oracle_calls_per_seed: int
    wall_time: float
    radius: float
    beta: float
    corollary_bound: Optional[float] = None
    schedule: Dict[str, Any] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)
    curves: Dict[int, List[tuple]] = field(default_factory=dict)
    oracle_calls: List[int] = field(default_factory=list)
    gap_unconverged: List[int] = field(default_factory=list)  # seeds whose gap solve hit the cap

    @property
    def passed(self) -> bool:
        return self.success_fraction >= 1.0 - self.beta

    @property
    def all_diverged(self) -> bool:
        return self.n_diverged == len(self.per_seed_metric)

    def to_dict(self, include_wall_time: bool = True) -> Dict[str, Any]:
        data = {
            "metric": self.metric,
            "R": self.radius,
            "beta": self.beta,
            "bound": _finite_or_none(self.bound),
            "corollary_bound": None if self.corollary_bound is None else _finite_or_none(self.corollary_bound),
            "success_fraction": self.success_fraction,
            "passed": self.passed,
            "quantiles": {_quantile_key(q): _finite_or_none(v) for q, v in sorted(self.quantiles.items())},
            "n_seeds": len(self.per_seed_metric),
            "n_diverged": self.n_diverged,
            "oracle_calls_per_seed": self.oracle_calls_per_seed,
            "per_seed_metric": [_finite_or_none(v) for v in self.per_seed_metric],
            "schedule": self.schedule,
            "schedule_violations": self.violations,
            "gap_unconverged_seeds": self.gap_unconverged,
        }
        if include_wall_time:
            data["wall_time"] = self.wall_time
        return data


@dataclass(frozen=True)
class MethodComparison:
    median_a: float
    median_b: float
    diverged_a: int
    diverged_b: int

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)
