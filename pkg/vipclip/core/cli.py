import functools
import json
import logging
import math
from typing import Any, Dict, Optional

import click
import numpy as np

from ..errors import ConfigError, VipClipError
from ..handlers.experiment import experiment_runner
from ..models.config import (
    EstimatorConfig,
    RunConfig,
    SolverConfig,
    TailsConfig,
    config_to_dict,
    load_config,
)
from ..models.experiment import ExperimentSpec
from ..models.noise import NoiseModel
from ..models.problem import AffineProblem
from ..models.schedule import Method
from ..services.oracle import estimator_stats, lemma_checks
from ..services.problems import ZOO, build_problem
from ..services.schedules import build_schedule, custom_seg_schedule, custom_sgda_schedule
from ..services.solvers import run_solver
from ..services.tails import histogram, noise_norm_samples, noise_norm_samples_along, tail_report
from ..storage.artifacts import ArtifactStore, jsonable

logger = logging.getLogger(__name__)

# Exit codes
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_DIVERGED = 3


def _echo_json(payload: Dict[str, Any]) -> None:
    click.echo(json.dumps(jsonable(payload), indent=2))


def guarded(command):
    """Map library errors to exit code 2 with a readable message"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as e:
            logger.error(f"Invalid configuration: {e.args[0]}")
            click.echo(f"Error: {e}", err=True)
            raise SystemExit(EXIT_INVALID)
        except VipClipError as e:
            logger.error(f"Invalid input: {e}")
            click.echo(f"Error: {e}", err=True)
            raise SystemExit(EXIT_INVALID)

    return wrapper


def problem_from_config(section) -> AffineProblem:
    return build_problem(section.name, **section.params)


def noise_from_config(section) -> NoiseModel:
    return NoiseModel(
        kind=section.kind, sigma=section.sigma,
        nu=section.nu, alpha=section.alpha, p_spike=section.p_spike,
    )


def start_point(problem: AffineProblem, x0, x0_distance: Optional[float]) -> np.ndarray:
    """x0 as given, or x* shifted by x0_distance along the all-ones direction"""
    if x0 is not None:
        return np.asarray(x0, dtype=float)
    distance = 1.0 if x0_distance is None else x0_distance
    d = problem.dimension
    return problem.solution + distance * np.ones(d) / math.sqrt(d)


def custom_schedule(solver: SolverConfig):
    c = solver.custom
    if Method(solver.method).is_extragradient:
        return custom_seg_schedule(c.gamma1, c.gamma2, c.lambda1, c.lambda2, c.m1, c.m2, solver.K)
    return custom_sgda_schedule(c.gamma, c.lam, c.m, solver.K)


def spec_from_config(config: RunConfig) -> ExperimentSpec:
    problem = problem_from_config(config.problem)
    solver, exp = config.solver, config.experiment
    return ExperimentSpec(
        problem=problem,
        noise=noise_from_config(config.noise),
        method=solver.method,
        case=solver.case,
        x0=start_point(problem, exp.x0, exp.x0_distance),
        K=solver.K,
        regime=solver.regime,
        schedule=custom_schedule(solver) if solver.case == "Custom" else None,
        n_seeds=exp.n_seeds,
        base_seed=exp.base_seed,
        beta=solver.beta,
        metric=exp.metric,
        R=exp.R,
        record_curves=config.emit_trajectory,
        threads=config.threads if isinstance(config.threads, int) else None,
    )


def _summary(report) -> Dict[str, Any]:
    data = report.to_dict(include_wall_time=True)
    for key in ("per_seed_metric", "schedule"):
        data.pop(key, None)
    return data


def _run_and_store(config_path: str, output_dir: Optional[str]):
    config = load_config(config_path, RunConfig)
    spec = spec_from_config(config)
    report = experiment_runner.run_experiment(spec)

    store = ArtifactStore(output_dir or config.output_dir)
    store.write_report(report, config=config_to_dict(config), spec=spec.to_dict())
    store.write_per_seed(report)
    if config.emit_trajectory:
        store.write_trajectory(report)
    return report, store


@click.group()
def cli():
    """Clipped SEG / SGDA solvers and high-probability bound verification"""


@cli.group()
def zoo():
    """Synthetic problem zoo"""


@zoo.command("list")
def zoo_list():
    for name, entry in ZOO.items():
        defaults = ", ".join(f"{k}={v}" for k, v in entry.defaults.items())
        click.echo(f"{name}: {entry.description} ({defaults})")


@zoo.command("describe")
@click.argument("name")
@click.option("--d", type=int, default=None)
@click.option("--mu", type=float, default=None)
@click.option("--big-l", "big_l", type=float, default=None)
@click.option("--s", type=float, default=None)
@click.option("--eps", type=float, default=None)
@click.option("--ell", type=float, default=None)
@click.option("--min-eig", "min_eig", type=float, default=None)
@click.option("--seed", type=int, default=None)
@guarded
def zoo_describe(name: str, **options):
    """Constructor parameters and certified constants of one zoo problem"""
    params = {k: v for k, v in options.items() if v is not None}
    problem = build_problem(name, **params)
    _echo_json({
        "name": name,
        "params": problem.params,
        "dimension": problem.dimension,
        **problem.constants,
    })


@cli.command()
@click.argument("config_path", type=click.Path())
@click.option("--output-dir", default=None, help="Override the config's output_dir")
@guarded
def run(config_path: str, output_dir: Optional[str]):
    """Run a Monte-Carlo experiment and write report.json and per_seed.csv"""
    report, store = _run_and_store(config_path, output_dir)
    _echo_json(_summary(report))
    if report.all_diverged:
        click.echo("All seeds diverged", err=True)
        raise SystemExit(EXIT_DIVERGED)


@cli.command()
@click.argument("config_path", type=click.Path())
@click.option("--output-dir", default=None, help="Override the config's output_dir")
@guarded
def verify(config_path: str, output_dir: Optional[str]):
    """Exit 0 iff the success fraction reaches 1 - beta"""
    report, _ = _run_and_store(config_path, output_dir)
    _echo_json(_summary(report))
    if not report.passed:
        click.echo(
            f"FAILED: success fraction {report.success_fraction:.4f} < {1 - report.beta:.4f}", err=True
        )
        raise SystemExit(EXIT_FAILED)
    click.echo("PASSED")


@cli.command()
@click.argument("config_path", type=click.Path())
@click.option("--output-dir", default=None, help="Override the config's output_dir")
@guarded
def tails(config_path: str, output_dir: Optional[str]):
    """Noise-norm tail diagnostics: tails.json and hist.csv"""
    config = load_config(config_path, TailsConfig)
    problem = problem_from_config(config.problem)
    model = noise_from_config(config.noise)
    section = config.tails
    extra: Dict[str, Any] = {"m": section.m, "seed": section.seed, "noise": model.to_dict()}

    if section.sweep_trajectory:
        exp = config.experiment
        x0 = start_point(problem, exp.x0 if exp else None, exp.x0_distance if exp else None)
        solver = config.solver
        if solver.case == "Custom":
            schedule = custom_schedule(solver)
        else:
            radius = (exp.R if exp and exp.R else None) or float(np.linalg.norm(x0 - problem.solution))
            spec = ExperimentSpec(
                problem, model, solver.method, solver.case, x0, solver.K,
                regime=solver.regime, n_seeds=1, beta=solver.beta, R=radius,
            )
            schedule = build_schedule(spec.method, spec.case, spec.regime, spec.schedule_params())
        path = run_solver(problem, NoiseModel.none(), solver.method, schedule, x0, section.seed).iterates
        points = path[:-1]
        per_point = max(1, section.n // len(points))
        samples = noise_norm_samples_along(problem, model, points, per_point, section.m, section.seed)
        extra.update({"sweep_trajectory": True, "points": len(points), "n_per_point": per_point})
    else:
        x = np.asarray(section.x, dtype=float) if section.x is not None else problem.solution
        samples = noise_norm_samples(problem, model, x, section.n, section.m, section.seed)
        extra.update({"sweep_trajectory": False, "x": x.tolist()})

    report = tail_report(samples)
    store = ArtifactStore(output_dir or config.output_dir)
    store.write_tails(report, extra)
    store.write_histogram(histogram(samples, section.n_bins))
    _echo_json(report.to_dict())


@cli.command("estimator-check")
@click.argument("config_path", type=click.Path())
@guarded
def estimator_check(config_path: str):
    """Monte-Carlo check of the clipped-estimator bias and variance ceilings"""
    config = load_config(config_path, EstimatorConfig)
    problem = problem_from_config(config.problem)
    model = noise_from_config(config.noise)
    section = config.estimator
    x = np.asarray(section.x, dtype=float) if section.x is not None else problem.solution

    stats = estimator_stats(problem, model, x, section.m, section.lam, section.n_trials, section.seed)
    checks = lemma_checks(stats, section.lam)
    _echo_json({"stats": stats.to_dict(), "checks": [c.to_dict() for c in checks]})
    failed = [c.name for c in checks if not c.passed]
    if failed:
        click.echo(f"FAILED: {', '.join(failed)}", err=True)
        raise SystemExit(EXIT_FAILED)
    click.echo("PASSED")
