"""Longitudinal analysis of layered, signed and semantic ego networks."""

__version__ = "0.1.0"

from .core import InteractionKind, InteractionRecord, Period, PeriodSchedule, PolarityLabel, period_of
from .config import PipelineConfig
from .errors import ConfigError, DataError, EgoShiftError, MissingStageError

__all__ = [
    "InteractionKind",
    "InteractionRecord",
    "Period",
    "PeriodSchedule",
    "PolarityLabel",
    "period_of",
    "PipelineConfig",
    "ConfigError",
    "DataError",
    "EgoShiftError",
    "MissingStageError",
]
