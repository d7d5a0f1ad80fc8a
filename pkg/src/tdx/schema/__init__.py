"""Schema package."""

from .config import (
    PARAMS,
    BoundsParams,
    ConfoundingParams,
    KSweepParams,
    OracleParams,
    RddSimParams,
    RunConfig,
    TdSimParams,
    TransportParams,
    load_run_config,
    parse_run_config,
)

__all__ = [
    'PARAMS',
    'BoundsParams',
    'ConfoundingParams',
    'KSweepParams',
    'OracleParams',
    'RddSimParams',
    'RunConfig',
    'TdSimParams',
    'TransportParams',
    'load_run_config',
    'parse_run_config',
]
