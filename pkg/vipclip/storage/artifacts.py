import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Union

from ..config import CSV_SIG_DIGITS, OUTPUT_DIR
from ..models.report import ExperimentReport, Histogram, TailReport

logger = logging.getLogger(__name__)

PER_SEED_HEADER = ("seed", "metric_value", "diverged", "oracle_calls")
TRAJECTORY_HEADER = ("seed", "k", "metric_value")
HISTOGRAM_HEADER = ("bin_left", "bin_right", "count")


def format_real(value: float) -> str:
    """Locale-free repr with 17 significant digits; non-finite values as nan/inf/-inf"""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{CSV_SIG_DIGITS}g}"


def jsonable(value: Any) -> Any:
    """Nested copy with non-finite floats spelled as strings"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return format_real(value)
    return value


class ArtifactStore:
    """Writes the CSV and JSON artifacts of one command into an output directory"""

    def __init__(self, output_dir: Union[str, Path] = OUTPUT_DIR):
        self.output_dir = Path(output_dir)

    def _path(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / name

    def _write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self._path(name)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        logger.info(f"Wrote {path}")
        return path

    def _write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(jsonable(payload), f, indent=2, allow_nan=False)
            f.write("\n")
        logger.info(f"Wrote {path}")
        return path

    def write_report(self, report: ExperimentReport, config: Optional[Dict[str, Any]] = None,
                     spec: Optional[Dict[str, Any]] = None) -> Path:
        payload = report.to_dict()
        if spec is not None:
            payload["experiment"] = spec
        if config is not None:
            payload["config"] = config
        return self._write_json("report.json", payload)

    def write_per_seed(self, report: ExperimentReport) -> Path:
        rows = (
            (seed, format_real(value), "true" if diverged else "false", calls)
            for seed, value, diverged, calls in zip(
                report.seeds, report.per_seed_metric, report.diverged, report.oracle_calls
            )
        )
        return self._write_csv("per_seed.csv", PER_SEED_HEADER, rows)

    def write_trajectory(self, report: ExperimentReport) -> Path:
        rows = (
            (seed, k, format_real(value))
            for seed in report.seeds
            for k, value in report.curves.get(seed, [])
        )
        return self._write_csv("trajectory.csv", TRAJECTORY_HEADER, rows)

    def write_tails(self, tail: TailReport, extra: Optional[Dict[str, Any]] = None) -> Path:
        payload = tail.to_dict()
        if extra:
            payload.update(extra)
        return self._write_json("tails.json", payload)

    def write_histogram(self, hist: Histogram) -> Path:
        rows = ((format_real(left), format_real(right), count) for left, right, count in hist.rows())
        return self._write_csv("hist.csv", HISTOGRAM_HEADER, rows)
