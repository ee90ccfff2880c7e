"""
Tests for YAML configuration parsing and line-level diagnostics
"""

from pathlib import Path

import pytest

from vipclip.errors import ConfigError
from vipclip.models.config import (
    EstimatorConfig,
    RunConfig,
    TailsConfig,
    dump_config,
    load_config,
    parse_config,
)

CONFIG_DIR = Path(__file__).parent / "configs"

RUN_YAML = """\
problem:
  name: strongly_monotone
  params: {d: 4, mu: 0.5, big_l: 2.0, seed: 3}
noise:
  kind: StudentT
  sigma: 1.0
  nu: 3
solver:
  method: ClippedSEG
  case: QSM
  K: 100
  beta: 0.05
experiment:
  n_seeds: 20
  x0_distance: 2.0
threads: 2
"""


def model_for(path: Path):
    text = path.read_text()
    if "\nestimator:" in text:
        return EstimatorConfig
    if "\ntails:" in text:
        return TailsConfig
    return RunConfig


def test_parse_run_config():
    config = parse_config(RUN_YAML, RunConfig)
    assert config.problem.params["d"] == 4
    assert config.noise.kind == "StudentT"
    assert config.solver.regime == "LargeStep"
    assert config.solver.K == 100
    assert config.experiment.x0_distance == 2.0
    assert config.experiment.base_seed == 0
    assert config.threads == 2
    assert not config.emit_trajectory


def test_config_round_trip():
    config = parse_config(RUN_YAML, RunConfig)
    assert parse_config(dump_config(config), RunConfig) == config


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_are_valid(path):
    config = load_config(path, model_for(path))
    assert parse_config(dump_config(config), type(config)) == config


def test_diagnostics_point_at_the_offending_line():
    text = RUN_YAML.replace("K: 100", "K: -1")
    with pytest.raises(ConfigError) as info:
        parse_config(text, RunConfig, source="bad.yaml")
    assert len(info.value.diagnostics) == 1
    assert info.value.diagnostics[0].startswith("bad.yaml:11: solver.K:")
    assert "bad.yaml:11" in str(info.value)


def test_unknown_keys_are_rejected():
    text = RUN_YAML.replace("  beta: 0.05", "  beta: 0.05\n  gama: 0.1")
    with pytest.raises(ConfigError) as info:
        parse_config(text, RunConfig, source="typo.yaml")
    assert info.value.diagnostics == ["typo.yaml:13: solver.gama: Extra inputs are not permitted"]


def test_beta_above_one_is_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config(RUN_YAML.replace("beta: 0.05", "beta: 3.0"), RunConfig)
    assert "solver.beta" in info.value.diagnostics[0]


def test_custom_case_needs_its_schedule():
    text = RUN_YAML.replace("case: QSM", "case: Custom")
    with pytest.raises(ConfigError) as info:
        parse_config(text, RunConfig, source="c.yaml")
    assert info.value.diagnostics[0].startswith("c.yaml:8: solver:")

    partial = text.replace("  beta: 0.05", "  beta: 0.05\n  custom: {gamma1: 0.1, gamma2: 0.1}")
    with pytest.raises(ConfigError, match="lambda1"):
        parse_config(partial, RunConfig)


def test_start_point_options_are_exclusive():
    text = RUN_YAML.replace("x0_distance: 2.0", "x0_distance: 2.0\n  x0: [0, 0, 0, 0]")
    with pytest.raises(ConfigError):
        parse_config(text, RunConfig)


def test_threads_accepts_auto_only():
    assert parse_config(RUN_YAML.replace("threads: 2", "threads: auto"), RunConfig).threads == "auto"
    with pytest.raises(ConfigError):
        parse_config(RUN_YAML.replace("threads: 2", "threads: 0"), RunConfig)
    with pytest.raises(ConfigError):
        parse_config(RUN_YAML.replace("threads: 2", "threads: many"), RunConfig)


def test_broken_yaml():
    with pytest.raises(ConfigError) as info:
        parse_config("problem: [unclosed\n", RunConfig, source="broken.yaml")
    assert info.value.diagnostics[0].startswith("broken.yaml:")
    with pytest.raises(ConfigError):
        parse_config("- a\n- b\n", RunConfig)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.yaml", RunConfig)


def test_tails_sweep_needs_a_solver():
    text = "problem: {name: bilinear}\ntails: {sweep_trajectory: true}\n"
    with pytest.raises(ConfigError):
        parse_config(text, TailsConfig)
    assert parse_config("problem: {name: bilinear}\n", TailsConfig).tails.n == 10000


def test_estimator_trials_floor():
    text = "problem: {name: bilinear}\nestimator: {lam: 1.0, n_trials: 999}\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text, EstimatorConfig, source="e.yaml")
    assert info.value.diagnostics[0].startswith("e.yaml:2: estimator.n_trials:")
