"""Snapshot basis plus row subsampling for parametric linear systems."""

from ._core import (
    Config,
    ConfigError,
    DimensionError,
    Error,
    Model,
    NumericalError,
    ParseError,
    RankDeficientError,
    interval_epsilon,
    leverage_scores,
    load_config,
    parse_config,
    run_experiment,
    select_rows,
    solve_ls,
)

__all__ = [
    "Config",
    "ConfigError",
    "DimensionError",
    "Error",
    "Model",
    "NumericalError",
    "ParseError",
    "RankDeficientError",
    "interval_epsilon",
    "leverage_scores",
    "load_config",
    "parse_config",
    "run_experiment",
    "select_rows",
    "solve_ls",
]
