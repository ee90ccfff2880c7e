"""
YAML run configurations validated with pydantic.

Validation errors carry the line of the offending key, read from the composed
YAML node tree.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config import DEFAULT_N_SEEDS, MIN_ESTIMATOR_TRIALS, OUTPUT_DIR
from ..errors import ConfigError

MethodName = Literal["ClippedSEG", "ClippedSGDA", "SEG", "SGDA"]
CaseName = Literal["Monotone", "WeakMinty", "QSM", "MonotoneSC", "SC", "QSM_SC", "Custom"]
RegimeName = Literal["LargeStep", "SmallStep"]
MetricName = Literal["Gap", "AvgSqNorm", "DistSq"]
NoiseKindName = Literal["None", "Gaussian", "StudentT", "SymmetricPareto", "BernoulliSpike"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemConfig(_Section):
    name: str
    params: Dict[str, Union[int, float]] = Field(default_factory=dict)


class NoiseConfig(_Section):
    kind: NoiseKindName = "None"
    sigma: float = Field(0.0, ge=0)
    nu: Optional[float] = None
    alpha: Optional[float] = None
    p_spike: Optional[float] = None


class CustomSchedule(_Section):
    """Constant custom schedule; SEG uses the *1/*2 fields, SGDA gamma/lam/m"""
    gamma1: Optional[float] = Field(None, gt=0)
    gamma2: Optional[float] = Field(None, gt=0)
    lambda1: Optional[float] = Field(None, gt=0)
    lambda2: Optional[float] = Field(None, gt=0)
    m1: Optional[int] = Field(None, ge=1)
    m2: Optional[int] = Field(None, ge=1)
    gamma: Optional[float] = Field(None, gt=0)
    lam: Optional[float] = Field(None, gt=0)
    m: Optional[int] = Field(None, ge=1)


class SolverConfig(_Section):
    method: MethodName
    case: CaseName
    regime: RegimeName = "LargeStep"
    K: int = Field(..., ge=0)
    beta: float = Field(0.1, gt=0, le=1)
    custom: Optional[CustomSchedule] = None

    @model_validator(mode="after")
    def check_custom(self):
        if self.case == "Custom":
            if self.custom is None:
                raise ValueError("case Custom needs a 'custom' schedule section")
            extragradient = self.method in ("ClippedSEG", "SEG")
            names = ("gamma1", "gamma2", "lambda1", "lambda2", "m1", "m2") if extragradient else ("gamma", "lam", "m")
            missing = [n for n in names if getattr(self.custom, n) is None]
            if missing:
                raise ValueError(f"custom schedule for {self.method} is missing {', '.join(missing)}")
        return self


class ExperimentConfig(_Section):
    n_seeds: int = Field(DEFAULT_N_SEEDS, ge=1)
    base_seed: int = Field(0, ge=0)
    metric: Optional[MetricName] = None
    x0: Optional[List[float]] = None
    x0_distance: Optional[float] = Field(None, gt=0)
    R: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_start(self):
        if self.x0 is not None and self.x0_distance is not None:
            raise ValueError("give either x0 or x0_distance, not both")
        return self


class TailsSection(_Section):
    x: Optional[List[float]] = None
    n: int = Field(10000, ge=1)
    m: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    n_bins: int = Field(50, ge=1)
    sweep_trajectory: bool = False


class EstimatorSection(_Section):
    x: Optional[List[float]] = None
    m: int = Field(1, ge=1)
    lam: float = Field(..., gt=0)
    n_trials: int = Field(100000, ge=MIN_ESTIMATOR_TRIALS)
    seed: int = Field(0, ge=0)


class _Common(_Section):
    problem: ProblemConfig
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    output_dir: str = OUTPUT_DIR
    threads: Union[int, Literal["auto"], None] = None

    @field_validator("threads")
    @classmethod
    def positive_threads(cls, value):
        if isinstance(value, int) and value < 1:
            raise ValueError("threads must be a positive integer or 'auto'")
        return value


class RunConfig(_Common):
    """Configuration of the run and verify commands"""
    solver: SolverConfig
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)
    emit_trajectory: bool = False


class TailsConfig(_Common):
    tails: TailsSection = Field(default_factory=TailsSection)
    solver: Optional[SolverConfig] = None
    experiment: Optional[ExperimentConfig] = None

    @model_validator(mode="after")
    def check_sweep(self):
        if self.tails.sweep_trajectory and self.solver is None:
            raise ValueError("tails.sweep_trajectory needs a 'solver' section")
        return self


class EstimatorConfig(_Common):
    estimator: EstimatorSection


ConfigModel = TypeVar("ConfigModel", bound=_Common)


def _node_line(root: Optional[yaml.Node], loc) -> Optional[int]:
    """1-based line of the deepest node along loc that exists in the document"""
    node, line = root, None
    if node is not None:
        line = node.start_mark.line + 1
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next(((k, v) for k, v in node.value if k.value == str(key)), None)
            if match is None:
                break
            line = match[0].start_mark.line + 1
            node = match[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def parse_config(text: str, model: Type[ConfigModel], source: str = "<config>") -> ConfigModel:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"invalid YAML in {source}", [f"{where}: {e}"])
    if not isinstance(data, dict):
        raise ConfigError(f"{source} must contain a mapping at the top level")

    try:
        return model.model_validate(data)
    except ValidationError as e:
        diagnostics = []
        for err in e.errors():
            loc = [part for part in err["loc"] if not isinstance(part, str) or not part.startswith("function-")]
            line = _node_line(root, loc)
            path = ".".join(str(part) for part in loc) or "<root>"
            diagnostics.append(f"{source}:{line}: {path}: {err['msg']}")
        raise ConfigError(f"{len(diagnostics)} validation error(s) in {source}", diagnostics)


def load_config(path: Union[str, Path], model: Type[ConfigModel]) -> ConfigModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    return parse_config(text, model, source=str(path))


def dump_config(config: _Common) -> str:
    """YAML text that parses back to an equal config"""
    return yaml.safe_dump(config.model_dump(exclude_none=True), sort_keys=False)


def config_to_dict(config: _Common) -> Dict[str, Any]:
    return config.model_dump(exclude_none=True)
