"""Multi-objective, multi-fidelity search for accurate and fair face identification."""

from fairpareto._core import (
    BackendError,
    ConfigError,
    DataError,
    Error,
    ProtocolError,
    cli,
    embedding_metrics,
    hypervolume2d,
    identification_ranks,
    ladder,
    load_run_log,
    parego,
    pareto_front_indices,
    pearson,
    run_search,
    sample_configs,
    validate_config,
    zdt1_mf,
)

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "ConfigError",
    "DataError",
    "Error",
    "ProtocolError",
    "cli",
    "embedding_metrics",
    "hypervolume2d",
    "identification_ranks",
    "ladder",
    "load_run_log",
    "parego",
    "pareto_front_indices",
    "pearson",
    "run_search",
    "sample_configs",
    "validate_config",
    "zdt1_mf",
]
