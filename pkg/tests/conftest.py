import numpy as np
import pytest

from swaykit.core import Eyes, Stance, TimeSeries, TrialRecord


def make_trial(bm, ap=None, ml=None, *, tid="t1", stance=Stance.NORMAL, eyes=Eyes.OPEN,
               round_=1, load_kg=None, fs=40.0):
    ts = lambda a: None if a is None else TimeSeries(np.asarray(a, dtype=float), fs)  # noqa: E731
    return TrialRecord(id=tid, stance=stance, eyes=eyes, round=round_, bm_raw=ts(bm),
                       cop_ap_mm=ts(ap), cop_ml_mm=ts(ml), load_kg=load_kg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
