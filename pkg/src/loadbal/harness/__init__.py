from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiment import run_experiment, run_sweep, write_outputs
from .suites import SUITES, SuiteResult, run_suites

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "run_experiment", "run_sweep", "write_outputs", "SUITES", "SuiteResult", "run_suites",
]
