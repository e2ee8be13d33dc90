"""Time-domain sway metrics.

All metrics act on one scalar channel.  The resultant CoP distance is built
first with :func:`cop_rd` when a planar measure is wanted.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import DataError, TimeSeries, TrialRecord

METRIC_NAMES = ("mean", "abs_mean", "rms", "path", "range", "velocity", "sd")


@dataclass(frozen=True)
class SwayMetricSet:
    mean: float
    abs_mean: float
    rms: float
    path: float
    range: float
    velocity: float
    sd: float  # population convention (divide by n)
    n: int
    duration_s: float

    def as_dict(self) -> dict:
        return asdict(self)

    def __getitem__(self, name: str) -> float:
        return getattr(self, name)


def _values(x, min_n: int = 1) -> np.ndarray:
    arr = x.samples if isinstance(x, TimeSeries) else np.asarray(x, dtype=float).reshape(-1)
    if arr.size < min_n:
        if arr.size == 0:
            raise DataError("empty series")
        raise DataError(f"need at least {min_n} samples, got {arr.size}")
    return arr


def cop_rd(ap: TimeSeries, ml: TimeSeries) -> TimeSeries:
    """Per-sample resultant distance ``sqrt(ap**2 + ml**2)``."""
    if len(ap) != len(ml):
        raise DataError(f"length mismatch: ap has {len(ap)} samples, ml has {len(ml)}")
    if ap.fs != ml.fs:
        raise DataError(f"fs mismatch: {ap.fs} vs {ml.fs}")
    return TimeSeries(np.hypot(ap.samples, ml.samples), ap.fs)


def sway_mean(x) -> float:
    return float(np.mean(_values(x)))


def sway_abs_mean(x) -> float:
    return float(np.mean(np.abs(_values(x))))


def sway_rms(x) -> float:
    v = _values(x)
    return float(np.sqrt(np.mean(v * v)))


def sway_path(x) -> float:
    """Cumulative absolute sample-to-sample displacement."""
    return float(np.sum(np.abs(np.diff(_values(x, 2)))))


def sway_range(x) -> float:
    v = _values(x)
    return float(np.max(v) - np.min(v))


def sway_velocity(x: TimeSeries) -> float:
    """Path divided by the recorded duration ``n / fs``."""
    v = _values(x, 2)
    return sway_path(v) / (v.size / x.fs)


def sway_sd(x) -> float:
    return float(np.std(_values(x)))


def metric_set(x: TimeSeries) -> SwayMetricSet:
    v = _values(x, 2)
    mean = float(np.mean(v))
    rms = float(np.sqrt(np.mean(v * v)))
    path = float(np.sum(np.abs(np.diff(v))))
    duration = v.size / x.fs
    return SwayMetricSet(
        mean=mean,
        abs_mean=float(np.mean(np.abs(v))),
        # rounding can push rms a hair below |mean| for near-constant series
        rms=max(rms, abs(mean)),
        path=path,
        range=float(np.max(v) - np.min(v)),
        velocity=path / duration,
        sd=float(np.std(v)),
        n=int(v.size),
        duration_s=duration,
    )


def trial_channels(t: TrialRecord) -> dict[str, TimeSeries]:
    """Recorded channels plus ``cop_rd_mm`` when the force-plate pair is present."""
    chans = dict(t.channels())
    if t.has_cop:
        chans["cop_rd_mm"] = cop_rd(t.cop_ap_mm, t.cop_ml_mm)
    return chans


def trial_metrics(t: TrialRecord) -> dict[str, SwayMetricSet]:
    return {name: metric_set(ts) for name, ts in trial_channels(t).items()}
