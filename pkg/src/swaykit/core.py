"""Domain types and dataset I/O for balance-mat / force-plate trials.

A dataset on disk is a JSON manifest plus one CSV per trial.  The CSV header
is ``t_s,bm_raw`` optionally followed by ``cop_ap_mm,cop_ml_mm``.  Samples are
written with ``repr`` so a load/write/load cycle is bit-exact.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MANIFEST_FORMAT = "swaykit-manifest/1"
DEFAULT_FS = 40.0
LOADS_KG = tuple(float(kg) for kg in range(10, 111, 10))


class SwayError(Exception):
    """Base class for every error raised by swaykit."""


class DataError(SwayError, ValueError):
    """Input does not satisfy a schema or precondition."""


class DegenerateError(SwayError, ArithmeticError):
    """The analysis is numerically undefined for the given data."""


class Stance(str, enum.Enum):
    NORMAL = "normal"
    TANDEM = "tandem"
    SINGLE_LEFT = "single-left"
    SINGLE_RIGHT = "single-right"
    FEET_TOGETHER = "feet-together"
    ROBOT_SINGLE = "robot-single"
    ROBOT_DOUBLE = "robot-double"

    @property
    def is_robot(self) -> bool:
        return self in (Stance.ROBOT_SINGLE, Stance.ROBOT_DOUBLE)


class Eyes(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"
    NA = "n/a"


class CleanPolicy(str, enum.Enum):
    DROP_MISSING = "drop-missing"
    REJECT = "reject"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled scalar signal.  ``samples`` is stored read-only."""

    samples: np.ndarray
    fs: float = DEFAULT_FS

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float, copy=True).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        if not (math.isfinite(self.fs) and self.fs > 0):
            raise DataError(f"fs must be a positive finite number, got {self.fs!r}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.fs

    def equals(self, other: "TimeSeries") -> bool:
        return (
            self.fs == other.fs
            and self.samples.shape == other.samples.shape
            and bool(np.array_equal(self.samples, other.samples, equal_nan=True))
        )


CHANNELS = ("bm_raw", "cop_ap_mm", "cop_ml_mm")
CHANNEL_UNITS = {"bm_raw": "unitless", "cop_ap_mm": "mm", "cop_ml_mm": "mm", "cop_rd_mm": "mm"}


@dataclass(frozen=True, eq=False)
class TrialRecord:
    id: str
    stance: Stance
    eyes: Eyes
    round: int
    bm_raw: TimeSeries
    cop_ap_mm: TimeSeries | None = None
    cop_ml_mm: TimeSeries | None = None
    load_kg: float | None = None
    duration_nominal_s: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stance", _enum(Stance, self.stance, "stance"))
        object.__setattr__(self, "eyes", _enum(Eyes, self.eyes, "eyes"))
        if not isinstance(self.round, (int, np.integer)) or self.round < 1:
            raise DataError(f"trial {self.id}: round must be an integer >= 1")
        if self.stance.is_robot:
            if self.load_kg is None or not any(
                math.isclose(self.load_kg, kg) for kg in LOADS_KG
            ):
                raise DataError(
                    f"trial {self.id}: robot trials need load_kg in 10..110 step 10, "
                    f"got {self.load_kg!r}"
                )
        elif self.load_kg is not None:
            raise DataError(f"trial {self.id}: human trials must not carry load_kg")
        if (self.cop_ap_mm is None) != (self.cop_ml_mm is None):
            raise DataError(f"trial {self.id}: cop_ap_mm and cop_ml_mm come as a pair")
        for name, ts in self.channels().items():
            if ts.fs != self.bm_raw.fs:
                raise DataError(
                    f"trial {self.id}: fs mismatch on {name} ({ts.fs} vs {self.bm_raw.fs})"
                )
            if len(ts) != len(self.bm_raw):
                raise DataError(
                    f"trial {self.id}: alignment error, {name} has {len(ts)} samples "
                    f"but bm_raw has {len(self.bm_raw)}"
                )

    @property
    def fs(self) -> float:
        return self.bm_raw.fs

    @property
    def n_samples(self) -> int:
        return len(self.bm_raw)

    @property
    def has_cop(self) -> bool:
        return self.cop_ap_mm is not None

    @property
    def is_robot(self) -> bool:
        return self.stance.is_robot

    def channels(self) -> dict[str, TimeSeries]:
        """Present channels in file order."""
        out = {"bm_raw": self.bm_raw}
        if self.cop_ap_mm is not None:
            out["cop_ap_mm"] = self.cop_ap_mm
            out["cop_ml_mm"] = self.cop_ml_mm
        return out

    def with_channels(self, arrays: Mapping[str, np.ndarray], warnings=None) -> "TrialRecord":
        kw = {name: TimeSeries(arr, self.fs) for name, arr in arrays.items()}
        if warnings is not None:
            kw["warnings"] = tuple(warnings)
        return replace(self, **kw)


def _enum(cls, value, what):
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise DataError(f"invalid {what} {value!r}; expected one of: {allowed}") from None


@dataclass(frozen=True, eq=False)
class Dataset:
    trials: tuple[TrialRecord, ...]
    manifest_meta: dict = field(default_factory=dict)
    digest: str = ""

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        seen = set()
        for t in self.trials:
            if t.id in seen:
                raise DataError(f"duplicate trial id {t.id!r}")
            seen.add(t.id)

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def by_id(self, trial_id: str) -> TrialRecord:
        for t in self.trials:
            if t.id == trial_id:
                return t
        raise KeyError(trial_id)


# --------------------------------------------------------------------------
# cleaning and trimming


def clean_trial(t: TrialRecord, policy: CleanPolicy | str = CleanPolicy.DROP_MISSING) -> TrialRecord:
    """Handle non-finite samples and flag flat channels.

    ``drop-missing`` removes a row from every channel when any channel is
    non-finite there.  ``reject`` raises on the first non-finite sample.
    Zero-variance channels are kept and reported in ``warnings``.
    """
    policy = CleanPolicy(policy)
    chans = {name: ts.samples for name, ts in t.channels().items()}
    stacked = np.vstack(list(chans.values()))
    finite = np.isfinite(stacked)
    bad_rows = ~finite.all(axis=0)

    if policy is CleanPolicy.REJECT and bad_rows.any():
        idx = int(np.flatnonzero(bad_rows)[0])
        which = [n for n, a in chans.items() if not math.isfinite(a[idx])]
        raise DataError(
            f"trial {t.id}: non-finite value at index {idx} in {', '.join(which)}"
        )

    warnings = [w for w in t.warnings if not w.startswith("zero-variance")]
    if bad_rows.any():
        keep = ~bad_rows
        chans = {n: a[keep] for n, a in chans.items()}
    for name, arr in chans.items():
        if arr.size and np.all(arr == arr[0]):
            warnings.append(f"zero-variance channel {name}")
    if not bad_rows.any() and tuple(warnings) == t.warnings:
        return t
    return t.with_channels(chans, warnings)


def trim_adjustment(t: TrialRecord, skip_s: float) -> TrialRecord:
    """Drop the leading adjustment period (``round-half-up(skip_s * fs)`` samples)."""
    if skip_s < 0:
        raise DataError(f"skip_s must be >= 0, got {skip_s}")
    n_skip = math.floor(skip_s * t.fs + 0.5)
    if n_skip == 0:
        return t
    if n_skip >= t.n_samples:
        raise DataError(
            f"trial {t.id}: skip of {skip_s} s ({n_skip} samples) exceeds trial "
            f"length of {t.n_samples} samples"
        )
    return t.with_channels({n: ts.samples[n_skip:] for n, ts in t.channels().items()})


# --------------------------------------------------------------------------
# manifest + CSV I/O

_TRIAL_FIELDS = {
    "id": str,
    "csv": str,
    "stance": str,
    "eyes": str,
    "load_kg": (int, float, type(None)),
    "round": int,
    "fs": (int, float),
    "duration_nominal_s": (int, float),
}


def _check_entry(i: int, entry) -> None:
    if not isinstance(entry, dict):
        raise DataError(f"manifest: trials[{i}] must be an object")
    for key, typ in _TRIAL_FIELDS.items():
        if key not in entry:
            raise DataError(f"manifest: trials[{i}] is missing field '{key}'")
        val = entry[key]
        if isinstance(val, bool) or not isinstance(val, typ):
            raise DataError(f"manifest: trials[{i}] field '{key}' has invalid value {val!r}")


def _parse_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            data = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
        except ValueError:
            data = None
    if data is None:
        # empty fields (missing samples) are read as NaN
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            fh.readline()
            for line_no, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != len(header):
                    raise DataError(
                        f"{path}: alignment error, line {line_no} has {len(parts)} fields, expected {len(header)}"
                    )
                try:
                    rows.append([float(p) if p.strip() else math.nan for p in parts])
                except ValueError as exc:
                    raise DataError(f"{path}: line {line_no}: {exc}") from None
        data = np.array(rows, dtype=float).reshape(-1, len(header))
    if data.shape[1] != len(header):
        raise DataError(f"{path}: {data.shape[1]} columns but header has {len(header)}")
    return header, data


def read_trial_csv(path: str | os.PathLike, fs: float) -> dict[str, TimeSeries]:
    """Parse one trial CSV into channels, checking the time column against ``fs``."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing trial file {path}")
    header, data = _parse_csv(path)
    valid_headers = (["t_s", "bm_raw"], ["t_s", "bm_raw", "cop_ap_mm", "cop_ml_mm"])
    if header not in valid_headers:
        raise DataError(f"{path}: unexpected header {','.join(header)}")
    if data.shape[0] == 0:
        raise DataError(f"{path}: no samples")
    t = data[:, 0]
    if t.size >= 2:
        steps = np.diff(t)
        if np.all(np.isfinite(steps)):
            if np.any(steps <= 0):
                raise DataError(f"{path}: t_s is not strictly increasing")
            implied = 1.0 / float(np.median(steps))
            if not math.isclose(implied, fs, rel_tol=1e-6):
                raise DataError(f"{path}: fs mismatch, t_s implies {implied:.6g} Hz, manifest says {fs} Hz")
    return {name: TimeSeries(data[:, j], fs) for j, name in enumerate(header) if j > 0}


def load_dataset(manifest_path: str | os.PathLike) -> Dataset:
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DataError(f"manifest not found: {manifest_path}")
    raw = manifest_path.read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"manifest is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "trials" not in doc:
        raise DataError("manifest: missing field 'trials'")
    entries = doc["trials"]
    if not isinstance(entries, list):
        raise DataError("manifest: field 'trials' must be a list")
    if not entries:
        raise DataError("empty dataset")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise DataError("manifest: field 'meta' must be an object")

    base = manifest_path.parent
    trials = []
    for i, entry in enumerate(entries):
        _check_entry(i, entry)
        fs = float(entry["fs"])
        chans = read_trial_csv(base / entry["csv"], fs)
        try:
            trials.append(
                TrialRecord(
                    id=entry["id"],
                    stance=entry["stance"],
                    eyes=entry["eyes"],
                    round=entry["round"],
                    load_kg=None if entry["load_kg"] is None else float(entry["load_kg"]),
                    duration_nominal_s=float(entry["duration_nominal_s"]),
                    **chans,
                )
            )
        except DataError as exc:
            raise DataError(f"manifest trials[{i}] ({entry['id']}): {exc}") from None
    return Dataset(tuple(trials), meta, hashlib.sha256(raw).hexdigest())


def format_sample(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def write_trial_csv(path: str | os.PathLike, t: TrialRecord) -> None:
    chans = t.channels()
    cols = [np.arange(t.n_samples) / t.fs] + [ts.samples for ts in chans.values()]
    lines = ["t_s," + ",".join(chans)]
    for row in np.column_stack(cols).tolist():
        lines.append(",".join(format_sample(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def manifest_entry(t: TrialRecord, csv_rel: str) -> dict:
    return {
        "id": t.id,
        "csv": csv_rel,
        "stance": t.stance.value,
        "eyes": t.eyes.value,
        "load_kg": t.load_kg,
        "round": int(t.round),
        "fs": t.fs,
        "duration_nominal_s": t.duration_nominal_s,
    }


def save_dataset(ds: Dataset | Iterable[TrialRecord], out_dir: str | os.PathLike,
                 meta: Mapping | None = None) -> Path:
    """Write trial CSVs under ``out_dir/trials`` and return the manifest path."""
    out_dir = Path(out_dir)
    trials: Sequence[TrialRecord] = ds.trials if isinstance(ds, Dataset) else tuple(ds)
    if meta is None:
        meta = ds.manifest_meta if isinstance(ds, Dataset) else {}
    try:
        (out_dir / "trials").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out_dir}: {exc}") from None
    entries = []
    for t in trials:
        rel = f"trials/{_safe_name(t.id)}.csv"
        write_trial_csv(out_dir / rel, t)
        entries.append(manifest_entry(t, rel))
    doc = {"format": MANIFEST_FORMAT, "meta": dict(meta), "trials": entries}
    manifest = out_dir / "manifest.json"
    manifest.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n", encoding="utf-8")
    return manifest


def _safe_name(trial_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in trial_id)
