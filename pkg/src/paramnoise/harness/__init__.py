from .config import ConfigError, ExperimentConfig, load_config, save_config
from .runner import (RunResult, RunRow, build_agent, evaluate_policy,
                     run_experiment, solved_check)
from .report import aggregate_runs, emit_csv, emit_plot, load_run_csv

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "save_config",
    "RunResult", "RunRow", "build_agent", "evaluate_policy",
    "run_experiment", "solved_check",
    "aggregate_runs", "emit_csv", "emit_plot", "load_run_csv",
]
