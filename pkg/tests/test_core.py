import json
import math

import numpy as np
import pytest
from conftest import make_trial
from hypothesis import given, settings
from hypothesis import strategies as st

from swaykit.core import (
    CleanPolicy,
    DataError,
    Dataset,
    Eyes,
    Stance,
    TimeSeries,
    TrialRecord,
    clean_trial,
    load_dataset,
    save_dataset,
    trim_adjustment,
)


def _write_manifest(tmp_path, trials, csv_text):
    (tmp_path / "t1.csv").write_text(csv_text)
    doc = {"format": "swaykit-manifest/1", "meta": {}, "trials": trials}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc))
    return path


def _entry(**kw):
    base = {"id": "t1", "csv": "t1.csv", "stance": "normal", "eyes": "open", "load_kg": None,
            "round": 1, "fs": 40, "duration_nominal_s": 20}
    base.update(kw)
    return base


def _csv(n, fs=40.0, cop_rows=None):
    lines = ["t_s,bm_raw,cop_ap_mm,cop_ml_mm"]
    for i in range(n):
        if cop_rows is not None and i >= cop_rows:
            lines.append(f"{i / fs!r},{float(i)!r}")
        else:
            lines.append(f"{i / fs!r},{float(i)!r},{0.5 * i!r},{-0.25 * i!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- loading

def test_load_800_samples_is_20_seconds(tmp_path):
    ds = load_dataset(_write_manifest(tmp_path, [_entry()], _csv(800)))
    assert len(ds) == 1
    t = ds.trials[0]
    assert t.n_samples == 800
    assert t.bm_raw.duration_s == 20.0
    assert len(ds.digest) == 64


def test_empty_trial_list(tmp_path):
    with pytest.raises(DataError, match="empty dataset"):
        load_dataset(_write_manifest(tmp_path, [], _csv(4)))


def test_short_cop_column_is_alignment_error(tmp_path):
    with pytest.raises(DataError, match="alignment"):
        load_dataset(_write_manifest(tmp_path, [_entry()], _csv(800, cop_rows=799)))


def test_misaligned_channels_in_record():
    with pytest.raises(DataError, match="alignment"):
        make_trial(np.zeros(800), np.zeros(799), np.zeros(799))


def test_missing_field_is_named(tmp_path):
    e = _entry()
    del e["eyes"]
    with pytest.raises(DataError, match="'eyes'"):
        load_dataset(_write_manifest(tmp_path, [e], _csv(10)))


def test_invalid_stance_lists_allowed(tmp_path):
    with pytest.raises(DataError, match="tandem"):
        load_dataset(_write_manifest(tmp_path, [_entry(stance="hopping")], _csv(10)))


def test_fs_mismatch(tmp_path):
    with pytest.raises(DataError, match="fs mismatch"):
        load_dataset(_write_manifest(tmp_path, [_entry(fs=100)], _csv(10)))


def test_missing_csv(tmp_path):
    path = _write_manifest(tmp_path, [_entry(csv="nope.csv")], _csv(10))
    with pytest.raises(DataError, match="missing trial file"):
        load_dataset(path)


def test_empty_cells_read_as_nan(tmp_path):
    text = "t_s,bm_raw\n0.0,1.0\n0.025,\n0.05,3.0\n"
    ds = load_dataset(_write_manifest(tmp_path, [_entry()], text))
    assert np.isnan(ds.trials[0].bm_raw.samples[1])


def test_robot_load_validation():
    with pytest.raises(DataError, match="load_kg"):
        make_trial(np.zeros(4), stance=Stance.ROBOT_DOUBLE, eyes=Eyes.NA, load_kg=15.0)
    with pytest.raises(DataError, match="human trials"):
        make_trial(np.zeros(4), load_kg=10.0)
    assert make_trial(np.zeros(4), stance=Stance.ROBOT_SINGLE, eyes=Eyes.NA, load_kg=110.0).is_robot


def test_duplicate_ids_rejected():
    t = make_trial([1.0, 2.0])
    with pytest.raises(DataError, match="duplicate"):
        Dataset((t, t))


def test_timeseries_is_read_only():
    ts = TimeSeries([1.0, 2.0], 40.0)
    with pytest.raises(ValueError):
        ts.samples[0] = 5.0
    with pytest.raises(DataError):
        TimeSeries([1.0], 0.0)


def test_round_trip_is_bit_exact(tmp_path, rng):
    trials = []
    for i, stance in enumerate([Stance.NORMAL, Stance.TANDEM]):
        n = 97
        bm = rng.standard_normal(n) * 1e5
        bm[3] = 1e-300
        bm[4] = 0.1 + 0.2  # repr 0.30000000000000004
        trials.append(make_trial(bm, rng.standard_normal(n) / 3, rng.standard_normal(n) * 7,
                                 tid=f"trial/{i}", stance=stance))
    trials.append(make_trial(rng.random(33), tid="bm-only", eyes=Eyes.CLOSED, round_=2))
    manifest = save_dataset(trials, tmp_path, {"note": "x"})
    back = load_dataset(manifest)
    assert back.manifest_meta == {"note": "x"}
    for a, b in zip(trials, back):
        assert a.id == b.id and a.stance is b.stance and a.eyes is b.eyes and a.round == b.round
        assert a.channels().keys() == b.channels().keys()
        for name, ts in a.channels().items():
            assert ts.equals(b.channels()[name])
    # and a second save is byte-identical
    out2 = tmp_path / "again"
    save_dataset(back, out2)
    assert (out2 / "trials" / "trial_0.csv").read_bytes() == (tmp_path / "trials" / "trial_0.csv").read_bytes()


# ---------------------------------------------------------------- cleaning

def test_drop_missing_example():
    t = clean_trial(make_trial([1.0, math.nan, 3.0]), CleanPolicy.DROP_MISSING)
    assert t.bm_raw.samples.tolist() == [1.0, 3.0]


def test_drop_missing_keeps_channels_in_lockstep():
    t = make_trial([1.0, 2.0, 3.0, 4.0], [0.1, 0.2, math.nan, 0.4], [5.0, math.inf, 7.0, 8.0])
    c = clean_trial(t)
    assert c.bm_raw.samples.tolist() == [1.0, 4.0]
    assert c.cop_ap_mm.samples.tolist() == [0.1, 0.4]
    assert c.cop_ml_mm.samples.tolist() == [5.0, 8.0]


@pytest.mark.parametrize("policy", list(CleanPolicy))
def test_finite_series_unchanged(policy):
    t = make_trial([1.0, 2.0, 4.0])
    assert clean_trial(t, policy) is t


def test_reject_reports_index():
    with pytest.raises(DataError, match="index 1"):
        clean_trial(make_trial([1.0, math.inf, 3.0]), "reject")


def test_zero_variance_warning_and_idempotence():
    t = clean_trial(make_trial([2.0, 2.0, math.nan, 2.0]))
    assert t.warnings == ("zero-variance channel bm_raw",)
    assert clean_trial(t) is t


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(st.floats(-1e6, 1e6), st.just(math.nan), st.just(math.inf)), min_size=1, max_size=40))
def test_clean_properties(values):
    t = make_trial(values)
    c = clean_trial(t)
    out = c.bm_raw.samples
    assert np.all(np.isfinite(out))
    assert out.tolist() == [v for v in values if math.isfinite(v)]
    again = clean_trial(c)
    assert again.bm_raw.equals(c.bm_raw) and again.warnings == c.warnings


# ---------------------------------------------------------------- trimming

def test_trim_five_seconds():
    t = trim_adjustment(make_trial(np.arange(1400.0)), 5)
    assert t.n_samples == 1200
    assert t.bm_raw.duration_s == 30.0
    assert t.bm_raw.samples[0] == 200.0


def test_trim_zero_is_identity():
    t = make_trial(np.arange(10.0))
    assert trim_adjustment(t, 0) is t


def test_trim_longer_than_trial():
    with pytest.raises(DataError, match="exceeds"):
        trim_adjustment(make_trial(np.arange(100.0)), 5)


def test_trim_rounds_half_up():
    t = make_trial(np.arange(10.0), fs=10.0)
    assert trim_adjustment(t, 0.25).n_samples == 7
    assert trim_adjustment(t, 0.24).n_samples == 8


def test_trial_record_enum_coercion():
    t = TrialRecord(id="x", stance="tandem", eyes="closed", round=1, bm_raw=TimeSeries([1.0]))
    assert t.stance is Stance.TANDEM and t.eyes is Eyes.CLOSED
