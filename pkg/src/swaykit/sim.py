"""Deterministic synthetic trials for the robot and human protocols.

Every random draw comes from a PCG64 stream seeded by
``SeedSequence(seed, spawn_key=(protocol, stance, load, round, trial, channel))``
so each trial and channel owns an independent substream and the output does
not depend on generation order.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .core import (
    DEFAULT_FS,
    LOADS_KG,
    DataError,
    Dataset,
    Eyes,
    Stance,
    TimeSeries,
    TrialRecord,
)

ROBOT_STANCES = (Stance.ROBOT_SINGLE, Stance.ROBOT_DOUBLE)
HUMAN_CONDITIONS = (
    (Stance.NORMAL, Eyes.OPEN),
    (Stance.NORMAL, Eyes.CLOSED),
    (Stance.TANDEM, Eyes.OPEN),
    (Stance.TANDEM, Eyes.CLOSED),
    (Stance.SINGLE_LEFT, Eyes.OPEN),
    (Stance.SINGLE_RIGHT, Eyes.OPEN),
    (Stance.FEET_TOGETHER, Eyes.OPEN),
)
# relative sway magnitude of each human condition
CONDITION_SCALE = {
    (Stance.NORMAL, Eyes.OPEN): 1.0,
    (Stance.NORMAL, Eyes.CLOSED): 1.3,
    (Stance.TANDEM, Eyes.OPEN): 1.7,
    (Stance.TANDEM, Eyes.CLOSED): 2.3,
    (Stance.SINGLE_LEFT, Eyes.OPEN): 2.0,
    (Stance.SINGLE_RIGHT, Eyes.OPEN): 2.1,
    (Stance.FEET_TOGETHER, Eyes.OPEN): 1.2,
}

OCTAGON_AMPLITUDE_MM = 10.0
OCTAGON_PERIOD_S = 10.0
HUMAN_SWAY_PHI = 0.98
PARTICIPANT_LOG_SD = 0.35

# (amplitude mm, frequency Hz, phase rad)
_HUMAN_TEMPLATE = {
    "ap": ((3.0, 0.11, 0.0), (1.5, 0.27, 0.8), (0.6, 0.53, 2.1)),
    "ml": ((2.0, 0.09, 1.3), (1.0, 0.31, 0.4), (0.4, 0.61, 2.7)),
}

_PROTOCOL_CODE = {"robot": 1, "human": 2}
_STANCE_CODE = {s: i for i, s in enumerate(Stance)}
_CH_SENSOR, _CH_SWAY_AP, _CH_SWAY_ML, _CH_PARTICIPANT = range(4)


@dataclass(frozen=True)
class NoiseModel:
    """Noise standard deviations are marginal (stationary) values."""

    sensor_sd: float = 0.05
    ar1_phi: float = 0.9
    # load_kg -> gain, highest power first
    gain_curve: tuple[float, ...] = (4e-6, 2e-4, 0.01, 1.0)
    single_leg_factor: float = 2.0
    sway_sd: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gain_curve", tuple(float(c) for c in self.gain_curve))
        if not 0.0 <= self.ar1_phi < 1.0:
            raise DataError(f"ar1_phi must lie in [0, 1), got {self.ar1_phi}")
        if self.sensor_sd < 0 or self.sway_sd < 0 or self.single_leg_factor < 0:
            raise DataError("noise standard deviations must be non-negative")
        if not 1 <= len(self.gain_curve) <= 4:
            raise DataError("gain_curve holds 1 to 4 polynomial coefficients")

    def gain(self, load_kg: float) -> float:
        return float(np.polyval(self.gain_curve, load_kg))

    def silent(self) -> "NoiseModel":
        return replace(self, sensor_sd=0.0, sway_sd=0.0)


def default_noise(protocol: str) -> NoiseModel:
    if protocol == "human":
        return NoiseModel(sensor_sd=300.0, ar1_phi=0.9, sway_sd=1.0)
    return NoiseModel()


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    protocol: str = "robot"
    stances: tuple[Stance, ...] = ()
    loads_kg: tuple[float, ...] = LOADS_KG
    trials_per_cell: int = 50
    rounds: int | None = None
    trial_s: float | None = None
    fs: float = DEFAULT_FS
    noise: NoiseModel | None = None
    n_participants: int = 51
    bm_map: tuple[float, float] = (1928.0, -624.0)
    bm_source: str = "ap"

    def __post_init__(self):
        if self.protocol not in _PROTOCOL_CODE:
            raise DataError(f"protocol must be 'robot' or 'human', got {self.protocol!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise DataError(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")
        robot = self.protocol == "robot"
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        if not self.stances:
            set_("stances", ROBOT_STANCES if robot else tuple(dict.fromkeys(s for s, _ in HUMAN_CONDITIONS)))
        try:
            set_("stances", tuple(Stance(s) for s in self.stances))
        except ValueError as exc:
            raise DataError(f"invalid stance: {exc}") from None
        if robot and not all(s.is_robot for s in self.stances):
            raise DataError("robot protocol only supports robot-single / robot-double stances")
        if not robot and any(s.is_robot for s in self.stances):
            raise DataError("human protocol cannot use robot stances")
        set_("loads_kg", tuple(float(kg) for kg in self.loads_kg))
        if robot:
            if not self.loads_kg:
                raise DataError("loads_kg must not be empty")
            for kg in self.loads_kg:
                if not any(math.isclose(kg, ok) for ok in LOADS_KG):
                    raise DataError(f"load {kg} kg is outside 10..110 step 10")
        if self.rounds is None:
            set_("rounds", 2 if robot else 1)
        if self.trial_s is None:
            set_("trial_s", 20.0 if robot else 35.0)
        if self.noise is None:
            set_("noise", default_noise(self.protocol))
        elif isinstance(self.noise, dict):
            set_("noise", NoiseModel(**self.noise))
        set_("bm_map", tuple(float(v) for v in self.bm_map))
        if int(self.trials_per_cell) < 1:
            raise DataError("trials_per_cell must be >= 1")
        if int(self.rounds) < 1:
            raise DataError("rounds must be >= 1")
        if int(self.n_participants) < 1:
            raise DataError("n_participants must be >= 1")
        if not (self.fs > 0 and self.trial_s > 0):
            raise DataError("fs and trial_s must be positive")
        n = self.trial_s * self.fs
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise DataError(f"trial_s * fs must be a whole number of samples, got {n}")
        if self.bm_source not in ("ap", "ml", "rd"):
            raise DataError("bm_source must be one of ap, ml, rd")
        if self.bm_map[0] == 0.0:
            raise DataError("bm_map slope must be non-zero")

    @property
    def n_samples(self) -> int:
        return int(round(self.trial_s * self.fs))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stances"] = [s.value for s in self.stances]
        d["loads_kg"] = list(self.loads_kg)
        d["bm_map"] = list(self.bm_map)
        d["noise"]["gain_curve"] = list(self.noise.gain_curve)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise DataError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        doc = dict(doc)
        if "noise" in doc and isinstance(doc["noise"], dict):
            base = asdict(default_noise(doc.get("protocol", "robot")))
            bad = set(doc["noise"]) - set(base)
            if bad:
                raise DataError(f"unknown noise field(s): {', '.join(sorted(bad))}")
            base.update(doc["noise"])
            doc["noise"] = NoiseModel(**base)
        for key in ("stances", "loads_kg", "bm_map"):
            if key in doc:
                doc[key] = tuple(doc[key])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise DataError(f"invalid config: {exc}") from None


def load_config(path: str | os.PathLike) -> SimConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError("config must be a JSON object")
    return SimConfig.from_dict(doc)


# --------------------------------------------------------------------------
# signal building blocks


def _rng(cfg: SimConfig, stance: Stance, load_kg: float, round_: int, index: int, channel: int):
    key = (
        _PROTOCOL_CODE[cfg.protocol],
        _STANCE_CODE[stance],
        int(round(load_kg * 1000)),
        int(round_),
        int(index),
        channel,
    )
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(cfg.seed), spawn_key=key)))


def ar1(rng: np.random.Generator, n: int, phi: float, innovation_sd: float) -> np.ndarray:
    """Stationary AR(1) path ``e[t] = phi * e[t-1] + innovation_sd * z[t]``."""
    w = innovation_sd * rng.standard_normal(n)
    w[0] /= math.sqrt(1.0 - phi * phi)
    if phi == 0.0:
        return w
    return lfilter([1.0], [1.0, -phi], w)


def octagon_path(n: int, fs: float, amplitude: float = OCTAGON_AMPLITUDE_MM,
                 period_s: float = OCTAGON_PERIOD_S) -> tuple[np.ndarray, np.ndarray]:
    """Constant-speed loop through eight waypoints on a circle; returns (ap, ml)."""
    angles = np.arange(9) * (np.pi / 4)
    wp_ap = amplitude * np.cos(angles)
    wp_ml = amplitude * np.sin(angles)
    u = (np.arange(n) / fs % period_s) / period_s * 8.0
    seg = np.minimum(np.floor(u).astype(int), 7)
    frac = u - seg
    ap = wp_ap[seg] + frac * (wp_ap[seg + 1] - wp_ap[seg])
    ml = wp_ml[seg] + frac * (wp_ml[seg + 1] - wp_ml[seg])
    return ap, ml


def human_template(n: int, fs: float) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n) / fs
    out = []
    for axis in ("ap", "ml"):
        sig = np.zeros(n)
        for amp, freq, phase in _HUMAN_TEMPLATE[axis]:
            sig += amp * np.sin(2 * np.pi * freq * t + phase)
        out.append(sig)
    return out[0], out[1]


# --------------------------------------------------------------------------
# trial and campaign generators


def gen_sway_trajectory(cfg: SimConfig, load_kg: float, trial_index: int, *,
                        stance: Stance | str | None = None, round_: int = 1) -> TrialRecord:
    """One robot trial: octagon loop on the force-plate axes, mat signal =
    gain(load) * resultant distance + AR(1) sensor noise."""
    if cfg.protocol != "robot":
        raise DataError("gen_sway_trajectory needs a robot config")
    stance = Stance(stance) if stance is not None else cfg.stances[0]
    if not stance.is_robot:
        raise DataError(f"{stance.value} is not a robot stance")
    if not any(math.isclose(load_kg, kg) for kg in LOADS_KG):
        raise DataError(f"load {load_kg} kg is outside 10..110 step 10")
    n = cfg.n_samples
    noise = cfg.noise
    ap, ml = octagon_path(n, cfg.fs)
    rd = np.hypot(ap, ml)
    bm = noise.gain(load_kg) * rd
    sd = noise.sensor_sd * (noise.single_leg_factor if stance is Stance.ROBOT_SINGLE else 1.0)
    if sd > 0:
        innov = sd * math.sqrt(1 - noise.ar1_phi**2)
        bm = bm + ar1(_rng(cfg, stance, load_kg, round_, trial_index, _CH_SENSOR), n, noise.ar1_phi, innov)
    tid = f"{stance.value}-L{int(round(load_kg)):03d}-t{trial_index:02d}-r{round_}"
    return TrialRecord(
        id=tid, stance=stance, eyes=Eyes.NA, round=int(round_), load_kg=float(load_kg),
        bm_raw=TimeSeries(bm, cfg.fs), cop_ap_mm=TimeSeries(ap, cfg.fs),
        cop_ml_mm=TimeSeries(ml, cfg.fs), duration_nominal_s=float(cfg.trial_s),
    )


def gen_robot_campaign(cfg: SimConfig) -> Dataset:
    if cfg.protocol != "robot":
        raise DataError("gen_robot_campaign needs protocol = robot")
    trials = [
        gen_sway_trajectory(cfg, load, i, stance=stance, round_=r)
        for r in range(1, cfg.rounds + 1)
        for stance in cfg.stances
        for load in cfg.loads_kg
        for i in range(cfg.trials_per_cell)
    ]
    return Dataset(tuple(trials), {"protocol": "robot", "config": cfg.to_dict()})


def participant_scale(cfg: SimConfig, participant: int) -> float:
    rng = _rng(cfg, Stance.NORMAL, 0.0, 0, participant, _CH_PARTICIPANT)
    return math.exp(PARTICIPANT_LOG_SD * rng.standard_normal())


def gen_human_trial(cfg: SimConfig, participant: int, stance: Stance, eyes: Eyes,
                    round_: int = 1, scale: float | None = None) -> TrialRecord:
    n = cfg.n_samples
    noise = cfg.noise
    if scale is None:
        scale = participant_scale(cfg, participant)
    k = scale * CONDITION_SCALE[(stance, eyes)]
    ap, ml = human_template(n, cfg.fs)
    # participant index and eyes share the trial slot of the stream key
    slot = participant * 2 + (eyes is Eyes.CLOSED)
    if noise.sway_sd > 0:
        innov = noise.sway_sd * math.sqrt(1 - HUMAN_SWAY_PHI**2)
        ap = ap + ar1(_rng(cfg, stance, 0.0, round_, slot, _CH_SWAY_AP), n, HUMAN_SWAY_PHI, innov)
        ml = ml + ar1(_rng(cfg, stance, 0.0, round_, slot, _CH_SWAY_ML), n, HUMAN_SWAY_PHI, innov)
    ap = k * ap
    ml = k * ml
    src = {"ap": ap, "ml": ml}.get(cfg.bm_source)
    if src is None:
        src = np.hypot(ap, ml)
    slope, intercept = cfg.bm_map
    bm = slope * src + intercept
    if noise.sensor_sd > 0:
        innov = noise.sensor_sd * math.sqrt(1 - noise.ar1_phi**2)
        bm = bm + ar1(_rng(cfg, stance, 0.0, round_, slot, _CH_SENSOR), n, noise.ar1_phi, innov)
    return TrialRecord(
        id=f"p{participant:03d}-{stance.value}-{eyes.value}-r{round_}",
        stance=stance, eyes=eyes, round=int(round_),
        bm_raw=TimeSeries(bm, cfg.fs), cop_ap_mm=TimeSeries(ap, cfg.fs),
        cop_ml_mm=TimeSeries(ml, cfg.fs), duration_nominal_s=float(cfg.trial_s),
    )


def gen_human_cohort(cfg: SimConfig, n_participants: int | None = None) -> Dataset:
    """Seven stance conditions per participant, each with its own latent sway scale."""
    if cfg.protocol != "human":
        raise DataError("gen_human_cohort needs protocol = human")
    n_participants = cfg.n_participants if n_participants is None else int(n_participants)
    if n_participants < 1:
        raise DataError("n_participants must be >= 1")
    conditions = [c for c in HUMAN_CONDITIONS if c[0] in cfg.stances]
    trials = []
    for p in range(1, n_participants + 1):
        scale = participant_scale(cfg, p)
        for r in range(1, cfg.rounds + 1):
            for stance, eyes in conditions:
                trials.append(gen_human_trial(cfg, p, stance, eyes, r, scale))
    meta = {"protocol": "human", "n_participants": n_participants, "config": cfg.to_dict()}
    return Dataset(tuple(trials), meta)


def simulate(cfg: SimConfig) -> Dataset:
    return gen_robot_campaign(cfg) if cfg.protocol == "robot" else gen_human_cohort(cfg)
