"""Semiclassical Schroedinger dynamics on flat tori."""

import csv
import io
import json

from ._core import (
    ConfigError,
    EmptyCluster,
    ExperimentConfig,
    FourierState,
    HamiltonianModel,
    PreconditionFailed,
    SemiclassError,
    ShapeError,
    TruncationError,
    coherent_state,
    command_names,
    config_hash,
    free_propagate,
    load_config,
    minimal_spacing,
    parse_config,
    parse_scale,
    position_density,
    run_to_dir,
    set_thread_count,
)
from ._core import run as _run

__version__ = "0.1.0"


def run(config, command=""):
    """Run a sweep. Returns (rows, meta) with meta decoded from JSON."""
    out = _run(config, command)
    return out["rows"], json.loads(out["meta"])


def read_report(directory):
    """Load report.csv and meta.json written by the CLI or run_to_dir."""
    with open(f"{directory}/report.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    for r in rows:
        for key in ("h", "tau", "value"):
            r[key] = float(r[key])
    with open(f"{directory}/meta.json") as f:
        meta = json.load(f)
    return rows, meta


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["command", "h", "tau", "metric", "value"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


__all__ = [
    "ConfigError",
    "EmptyCluster",
    "ExperimentConfig",
    "FourierState",
    "HamiltonianModel",
    "PreconditionFailed",
    "SemiclassError",
    "ShapeError",
    "TruncationError",
    "coherent_state",
    "command_names",
    "config_hash",
    "free_propagate",
    "load_config",
    "minimal_spacing",
    "parse_config",
    "parse_scale",
    "position_density",
    "read_report",
    "rows_to_csv",
    "run",
    "run_to_dir",
    "set_thread_count",
]
