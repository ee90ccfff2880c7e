from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..config import CONSTANT_TOL, SOLUTION_TOL
from ..errors import DimensionMismatchError, InvalidParameterError
from ..utils.linalg import sym_part


class Property(str, Enum):
    MONOTONE = "Monotone"
    STAR_MONOTONE = "StarMonotone"
    SNC = "SNC"
    QSM = "QSM"
    SC = "SC"
    LIPSCHITZ = "Lipschitz"


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise InvalidParameterError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AffineProblem:
    """
    Affine operator F(z) = A z + b with a known solution and certified constants.

    lipschitz is L, qsm_mu is mu (0 when the instance is not quasi strongly
    monotone), sc_ell is the star-cocoercivity constant and snc_rho the
    star-negative-comonotonicity constant; absent constants are None.
    """
    matrix: np.ndarray
    offset: np.ndarray
    solution: np.ndarray
    lipschitz: float
    qsm_mu: float = 0.0
    sc_ell: Optional[float] = None
    snc_rho: Optional[float] = None
    name: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, 2, "matrix"))
        object.__setattr__(self, "offset", _frozen_array(self.offset, 1, "offset"))
        object.__setattr__(self, "solution", _frozen_array(self.solution, 1, "solution"))
        d = self.offset.shape[0]
        if self.matrix.shape != (d, d) or self.solution.shape != (d,):
            raise DimensionMismatchError(
                f"inconsistent shapes: matrix {self.matrix.shape}, offset {self.offset.shape}, "
                f"solution {self.solution.shape}"
            )
        if self.lipschitz < 0 or self.qsm_mu < 0:
            raise InvalidParameterError("lipschitz and qsm_mu must be nonnegative")
        self._certify()

    def _certify(self) -> None:
        """Reject a solution that is not a zero of F or constants the matrix does not have"""
        residual = float(np.linalg.norm(self.matrix @ self.solution + self.offset))
        if residual > SOLUTION_TOL * (1.0 + float(np.linalg.norm(self.offset))):
            raise InvalidParameterError(f"solution is not a zero of F: ||A x* + b|| = {residual:.3e}")

        sigma_max = float(np.linalg.norm(self.matrix, 2))
        if abs(self.lipschitz - sigma_max) > CONSTANT_TOL * max(1.0, sigma_max):
            raise InvalidParameterError(
                f"lipschitz = {self.lipschitz} but the spectral norm of A is {sigma_max:.12g}"
            )
        sym_eigs = np.linalg.eigvalsh(sym_part(self.matrix))
        if self.qsm_mu > 0 and sym_eigs[0] < self.qsm_mu - CONSTANT_TOL * max(1.0, self.qsm_mu):
            raise InvalidParameterError(
                f"qsm_mu = {self.qsm_mu} exceeds lambda_min of the symmetric part, {sym_eigs[0]:.12g}"
            )
        symmetric = np.allclose(self.matrix, self.matrix.T, rtol=0.0, atol=CONSTANT_TOL)
        if self.sc_ell is not None and symmetric and sym_eigs[0] >= -CONSTANT_TOL:
            if self.sc_ell < sym_eigs[-1] - CONSTANT_TOL * max(1.0, sym_eigs[-1]):
                raise InvalidParameterError(
                    f"sc_ell = {self.sc_ell} is below lambda_max(A) = {sym_eigs[-1]:.12g}"
                )

    @property
    def dimension(self) -> int:
        return self.offset.shape[0]

    def check_point(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dimension,):
            raise DimensionMismatchError(f"expected a {self.dimension}-vector, got shape {z.shape}")
        return z

    def evaluate(self, z) -> np.ndarray:
        """F(z) = A z + b"""
        return self.matrix @ self.check_point(z) + self.offset

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Row-wise F for an (n, d) array of points"""
        return points @ self.matrix.T + self.offset

    def same_instance(self, other: "AffineProblem") -> bool:
        return (
            np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.offset, other.offset)
            and np.array_equal(self.solution, other.solution)
        )

    @property
    def constants(self) -> Dict[str, Optional[float]]:
        return {"L": self.lipschitz, "mu": self.qsm_mu, "ell": self.sc_ell, "rho": self.snc_rho}

    def to_dict(self) -> Dict[str, Any]:
        """JSON document used to replay experiments"""
        return {
            "name": self.name,
            "params": dict(self.params),
            "dim": self.dimension,
            "matrix": self.matrix.reshape(-1).tolist(),
            "offset": self.offset.tolist(),
            "solution": self.solution.tolist(),
            "constants": self.constants,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AffineProblem":
        d = int(data["dim"])
        constants = data.get("constants", {})
        return cls(
            matrix=np.asarray(data["matrix"], dtype=float).reshape(d, d),
            offset=data["offset"],
            solution=data["solution"],
            lipschitz=float(constants["L"]),
            qsm_mu=float(constants.get("mu") or 0.0),
            sc_ell=constants.get("ell"),
            snc_rho=constants.get("rho"),
            name=data.get("name", "custom"),
            params=data.get("params", {}),
        )


@dataclass(frozen=True, eq=False)
class ProbeReport:
    property: Property
    radius: float
    n_samples: int
    min_slack: float
    worst_point: np.ndarray
    constant: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.min_slack >= 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "property": self.property.value,
            "radius": self.radius,
            "n_samples": self.n_samples,
            "min_slack": self.min_slack,
            "worst_point": self.worst_point.tolist(),
            "constant": self.constant,
        }
