"""Postural sway metrics and balance-device validation statistics."""
from .core import (
    CleanPolicy,
    DataError,
    Dataset,
    DegenerateError,
    Eyes,
    Stance,
    SwayError,
    TimeSeries,
    TrialRecord,
    clean_trial,
    load_dataset,
    save_dataset,
    trim_adjustment,
)
from .metrics import (
    SwayMetricSet,
    cop_rd,
    metric_set,
    sway_abs_mean,
    sway_mean,
    sway_path,
    sway_range,
    sway_rms,
    sway_velocity,
)

__version__ = "0.1.0"

__all__ = [
    "CleanPolicy",
    "DataError",
    "Dataset",
    "DegenerateError",
    "Eyes",
    "Stance",
    "SwayError",
    "SwayMetricSet",
    "TimeSeries",
    "TrialRecord",
    "clean_trial",
    "cop_rd",
    "load_dataset",
    "metric_set",
    "save_dataset",
    "sway_abs_mean",
    "sway_mean",
    "sway_path",
    "sway_range",
    "sway_rms",
    "sway_velocity",
    "trim_adjustment",
]
