from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np


@dataclass(eq=False)
class Trajectory:
    """
    Record of one solver run over iterations k = 0..K.

    iterates holds x^0..x^{K+1} and extrapolations x~^0..x~^K (SEG only) when the
    run was asked to keep them; the per-k histories and running sums are always
    kept, so metrics never need the stored points.
    """
    method: str
    dimension: int
    iterates: Optional[np.ndarray] = None
    extrapolations: Optional[np.ndarray] = None
    avg_extrapolation: Optional[np.ndarray] = None
    avg_iterate: Optional[np.ndarray] = None
    sq_norm_sum: float = 0.0
    sq_norm_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dist_sq_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    checkpoints: Dict[int, np.ndarray] = field(default_factory=dict)
    final_iterate: Optional[np.ndarray] = None
    steps_completed: int = 0
    oracle_calls: int = 0
    diverged: bool = False
    diverged_at: Optional[int] = None

    @property
    def averaged_point(self) -> Optional[np.ndarray]:
        """x~_avg for extragradient runs, x_avg otherwise"""
        if self.avg_extrapolation is not None:
            return self.avg_extrapolation
        return self.avg_iterate

    @property
    def avg_sq_norm(self) -> float:
        if self.sq_norm_history.size == 0:
            return float("nan")
        return self.sq_norm_sum / self.sq_norm_history.size

    def to_dict(self) -> Dict[str, Any]:
        """Summary without the stored point sequences"""

        def as_list(value):
            return None if value is None else value.tolist()

        return {
            "method": self.method,
            "dimension": self.dimension,
            "steps_completed": self.steps_completed,
            "oracle_calls": self.oracle_calls,
            "diverged": self.diverged,
            "diverged_at": self.diverged_at,
            "final_iterate": as_list(self.final_iterate),
            "avg_extrapolation": as_list(self.avg_extrapolation),
            "avg_iterate": as_list(self.avg_iterate),
            "sq_norm_sum": self.sq_norm_sum,
        }
