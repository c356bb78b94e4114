"""Configuration, execution and file output for simulation experiments."""

from .config import BUILTIN_PRIORS, PriorSpec, RecordSchedule, SimulationConfig, builtin_config, load_config
from .runner import (
    EnsembleSummary,
    OutcomeClass,
    OutcomeKind,
    PathTrace,
    classify_outcome,
    path_seeds,
    run_ensemble,
    run_path,
)
from .output import emit_decomposition_csv, emit_summary, emit_trace_csv

__all__ = [
    "BUILTIN_PRIORS",
    "EnsembleSummary",
    "OutcomeClass",
    "OutcomeKind",
    "PathTrace",
    "PriorSpec",
    "RecordSchedule",
    "SimulationConfig",
    "builtin_config",
    "classify_outcome",
    "emit_decomposition_csv",
    "emit_summary",
    "emit_trace_csv",
    "load_config",
    "path_seeds",
    "run_ensemble",
    "run_path",
]
