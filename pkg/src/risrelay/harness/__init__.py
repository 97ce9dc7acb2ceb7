"""Configuration files, SNR sweeps, CSV output and the command-line interface."""
from .config import ConfigError, RunConfig, load_config, parse_config
from .sweep import SweepRow, SweepSpec, compare_report, read_csv, run_sweep, write_csv

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "SweepRow",
    "SweepSpec",
    "compare_report",
    "read_csv",
    "run_sweep",
    "write_csv",
]
