"""
Synthetic problem zoo.

All instances are affine, so every structural constant is an exact eigenvalue or
singular-value statement. The weak-Minty and star-cocoercive instances are our own
constructions.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np

from ..errors import InvalidParameterError, MissingConstantError
from ..models.problem import AffineProblem, ProbeReport, Property
from ..utils.linalg import random_orthogonal, sample_ball

logger = logging.getLogger(__name__)


def make_strongly_monotone(d: int, mu: float, big_l: float, seed: int,
                           rotate: bool = True, random_solution: bool = True) -> AffineProblem:
    """
    Block-diagonal 2x2 blocks [[mu, c], [-c, mu]] with c = sqrt(L^2 - mu^2),
    conjugated by a seeded orthogonal matrix. Every block has singular values L
    and symmetric part mu * I, so both constants are exact.
    """
    if d <= 0 or d % 2 != 0:
        raise InvalidParameterError(f"d must be a positive even integer, got {d}")
    if not 0 < mu <= big_l:
        raise InvalidParameterError(f"need 0 < mu <= L, got mu={mu}, L={big_l}")

    rng = np.random.default_rng(seed)
    c = math.sqrt(big_l ** 2 - mu ** 2)
    block = np.array([[mu, c], [-c, mu]])
    matrix = np.kron(np.eye(d // 2), block)
    if rotate:
        q = random_orthogonal(d, rng)
        matrix = q @ matrix @ q.T
    if random_solution:
        solution = sample_ball(np.zeros(d), 1.0, 1, rng)[0]
    else:
        solution = np.zeros(d)
    offset = -(matrix @ solution)

    return AffineProblem(
        matrix=matrix,
        offset=offset,
        solution=solution,
        lipschitz=float(big_l),
        qsm_mu=float(mu),
        # ||Az||^2 <= L^2 ||z||^2 <= (L^2 / mu) <Az, z>
        sc_ell=big_l ** 2 / mu,
        snc_rho=0.0,
        name="strongly_monotone",
        params={"d": d, "mu": mu, "big_l": big_l, "seed": seed},
    )


def make_bilinear(d: int, s: float) -> AffineProblem:
    """Bilinear game min_x max_y s<x, y>: A = [[0, sI], [-sI, 0]], b = 0"""
    if d <= 0:
        raise InvalidParameterError(f"d must be positive, got {d}")
    if s <= 0:
        raise InvalidParameterError(f"s must be positive, got {s}")

    eye = np.eye(d)
    zero = np.zeros((d, d))
    matrix = np.block([[zero, s * eye], [-s * eye, zero]])
    return AffineProblem(
        matrix=matrix,
        offset=np.zeros(2 * d),
        solution=np.zeros(2 * d),
        lipschitz=float(s),
        qsm_mu=0.0,
        snc_rho=0.0,
        name="bilinear",
        params={"d": d, "s": s},
    )


def make_weak_minty(eps: float) -> AffineProblem:
    """
    Rotation with a small expansive part: A = [[-eps, 1], [-1, -eps]].

    <F(z), z> = -eps ||z||^2 and ||F(z)||^2 = (1 + eps^2) ||z||^2, so the SNC
    inequality holds with equality for rho = eps / (1 + eps^2).
    """
    if not 0 < eps < 1:
        raise InvalidParameterError(f"eps must lie in (0, 1), got {eps}")

    matrix = np.array([[-eps, 1.0], [-1.0, -eps]])
    return AffineProblem(
        matrix=matrix,
        offset=np.zeros(2),
        solution=np.zeros(2),
        lipschitz=math.sqrt(1.0 + eps ** 2),
        qsm_mu=0.0,
        snc_rho=eps / (1.0 + eps ** 2),
        name="weak_minty",
        params={"eps": eps},
    )


def make_star_cocoercive(d: int, ell: float, min_eig: float, seed: int) -> AffineProblem:
    """Symmetric PSD matrix with a seeded spectrum in [min_eig, ell] hitting both ends"""
    if d <= 0:
        raise InvalidParameterError(f"d must be positive, got {d}")
    if ell <= 0 or not 0 <= min_eig <= ell:
        raise InvalidParameterError(f"need 0 <= min_eig <= ell and ell > 0, got {min_eig}, {ell}")

    rng = np.random.default_rng(seed)
    if d == 1:
        spectrum = np.array([ell])
    else:
        inner = rng.uniform(min_eig, ell, size=d - 2)
        spectrum = np.concatenate([[min_eig], inner, [ell]])
    q = random_orthogonal(d, rng)
    matrix = (q * spectrum) @ q.T
    matrix = 0.5 * (matrix + matrix.T)

    return AffineProblem(
        matrix=matrix,
        offset=np.zeros(d),
        solution=np.zeros(d),
        lipschitz=float(ell),
        qsm_mu=float(min_eig),
        sc_ell=float(ell),
        snc_rho=0.0,
        name="star_cocoercive",
        params={"d": d, "ell": ell, "min_eig": min_eig, "seed": seed},
    )


def evaluate(problem: AffineProblem, z) -> np.ndarray:
    return problem.evaluate(z)


def _required(value: Optional[float], prop: Property) -> float:
    if value is None:
        raise MissingConstantError(f"property {prop.value} needs a constant the problem does not certify")
    return float(value)


def probe_property(problem: AffineProblem, prop: Property, radius: float, n_samples: int,
                   seed: int, constant: Optional[float] = None) -> ProbeReport:
    """
    Minimum slack of an assumption's defining inequality over points uniform in
    B_radius(x*). Pair properties (Monotone, Lipschitz) sample independent pairs.
    `constant` overrides the certified constant, e.g. SNC with rho = 0.
    """
    prop = Property(prop)
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be at least 1")
    if radius <= 0:
        raise InvalidParameterError("radius must be positive")

    rng = np.random.default_rng(seed)
    center = problem.solution
    x = sample_ball(center, radius, n_samples, rng)
    fx = problem.evaluate_many(x)
    shift = x - center

    if prop in (Property.MONOTONE, Property.LIPSCHITZ):
        y = sample_ball(center, radius, n_samples, rng)
        fy = problem.evaluate_many(y)
        if prop is Property.MONOTONE:
            slack = np.einsum("ij,ij->i", fx - fy, x - y)
        else:
            lip = _required(problem.lipschitz if constant is None else constant, prop)
            slack = lip * np.linalg.norm(x - y, axis=1) - np.linalg.norm(fx - fy, axis=1)
            constant = lip
    elif prop is Property.STAR_MONOTONE:
        slack = np.einsum("ij,ij->i", fx, shift)
    elif prop is Property.SNC:
        rho = _required(problem.snc_rho if constant is None else constant, prop)
        slack = np.einsum("ij,ij->i", fx, shift) + rho * np.einsum("ij,ij->i", fx, fx)
        constant = rho
    elif prop is Property.QSM:
        mu = _required(problem.qsm_mu if constant is None else constant, prop)
        slack = np.einsum("ij,ij->i", fx, shift) - mu * np.einsum("ij,ij->i", shift, shift)
        constant = mu
    else:
        ell = _required(problem.sc_ell if constant is None else constant, prop)
        slack = ell * np.einsum("ij,ij->i", fx, shift) - np.einsum("ij,ij->i", fx, fx)
        constant = ell

    worst = int(np.argmin(slack))
    report = ProbeReport(
        property=prop,
        radius=float(radius),
        n_samples=int(n_samples),
        min_slack=float(slack[worst]),
        worst_point=x[worst].copy(),
        constant=constant,
    )
    if report.min_slack < 0:
        logger.info(f"{prop.value} probe on {problem.name}: min slack {report.min_slack:.3e}")
    return report


@dataclass(frozen=True)
class ZooEntry:
    name: str
    constructor: Callable[..., AffineProblem]
    defaults: Dict[str, Any]
    description: str

    def build(self, **overrides) -> AffineProblem:
        params = dict(self.defaults)
        unknown = set(overrides) - set(params)
        if unknown:
            raise InvalidParameterError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        params.update({k: v for k, v in overrides.items() if v is not None})
        return self.constructor(**params)


ZOO: Dict[str, ZooEntry] = {
    "strongly_monotone": ZooEntry(
        "strongly_monotone", make_strongly_monotone,
        {"d": 10, "mu": 1.0, "big_l": 2.0, "seed": 0},
        "rotated 2x2 blocks, quasi strongly monotone (mu) and L-Lipschitz",
    ),
    "bilinear": ZooEntry(
        "bilinear", make_bilinear, {"d": 5, "s": 1.0},
        "bilinear game, monotone with equality, not strongly monotone",
    ),
    "weak_minty": ZooEntry(
        "weak_minty", make_weak_minty, {"eps": 0.5},
        "non-monotone rotation, star-negatively comonotone with tight rho",
    ),
    "star_cocoercive": ZooEntry(
        "star_cocoercive", make_star_cocoercive, {"d": 4, "ell": 1.0, "min_eig": 0.0, "seed": 0},
        "symmetric PSD, star-cocoercive with ell = lambda_max",
    ),
}


def build_problem(name: str, **params) -> AffineProblem:
    if name not in ZOO:
        raise InvalidParameterError(f"unknown zoo problem '{name}', expected one of {sorted(ZOO)}")
    return ZOO[name].build(**params)
