import numpy as np
import oracles
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swaykit.core import DataError, DegenerateError
from swaykit.stats import Reliability, icc_two_way_mixed


def test_identical_columns():
    r = icc_two_way_mixed([[1, 1], [2, 2], [3, 3]])
    assert r.icc_single == 1.0 and r.icc_average == 1.0
    assert r.degenerate and r.interpretation is Reliability.EXCELLENT


def test_offset_columns(rng):
    x = rng.standard_normal(20)
    r = icc_two_way_mixed(np.column_stack([x, x + 7.0, x - 3.0]))
    assert r.icc_single == 1.0 and r.degenerate


def test_6x2_matches_nested_loop_anova(rng):
    m = rng.standard_normal((6, 2))
    r = icc_two_way_mixed(m)
    o = oracles.anova_icc(m.tolist())
    assert abs(r.icc_single - o["single"]) <= 1e-10
    assert abs(r.icc_average - o["average"]) <= 1e-10
    assert r.msr == pytest.approx(o["msr"], rel=1e-10)
    assert r.mse == pytest.approx(o["mse"], rel=1e-10)


def test_confidence_interval_against_scipy_quantiles(rng):
    from scipy import stats

    m = rng.standard_normal((15, 3)) + rng.standard_normal((15, 1)) * 2
    r = icc_two_way_mixed(m, alpha=0.05)
    n, k = m.shape
    f = r.f_value
    fl = f / stats.f.ppf(0.975, n - 1, (n - 1) * (k - 1))
    fu = f * stats.f.ppf(0.975, (n - 1) * (k - 1), n - 1)
    assert r.ci95_single[0] == pytest.approx((fl - 1) / (fl + k - 1), rel=1e-8)
    assert r.ci95_single[1] == pytest.approx((fu - 1) / (fu + k - 1), rel=1e-8)
    assert r.ci95_average[0] == pytest.approx(1 - 1 / fl, rel=1e-8)
    assert r.ci95_average[1] == pytest.approx(1 - 1 / fu, rel=1e-8)
    assert r.p_value == pytest.approx(stats.f.sf(f, n - 1, (n - 1) * (k - 1)), rel=1e-8)
    assert r.ci95_single[0] < r.icc_single < r.ci95_single[1]


def test_errors():
    with pytest.raises(DataError):
        icc_two_way_mixed([[1.0, 2.0]])
    with pytest.raises(DataError):
        icc_two_way_mixed([[1.0, np.nan], [2.0, 3.0]])
    with pytest.raises(DegenerateError):
        icc_two_way_mixed(np.full((4, 2), 3.0))


def test_variance_recovery_small():
    # reduced replication count; the full check lives in the acceptance suite
    for target in (0.5, 0.95):
        vals = []
        for rep in range(40):
            g = np.random.default_rng(1000 + rep)
            b = g.standard_normal((200, 1)) * np.sqrt(target)
            e = g.standard_normal((200, 2)) * np.sqrt(1 - target)
            vals.append(icc_two_way_mixed(b + e + np.array([0.0, 5.0])).icc_single)
        assert abs(np.mean(vals) - target) < 0.03


matrices = st.tuples(st.integers(2, 12), st.integers(2, 4)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-100, 100)))


@settings(max_examples=80, deadline=None)
@given(matrices, st.floats(0.1, 10), st.floats(-50, 50))
def test_affine_and_permutation_invariance(m, a, c):
    try:
        base = icc_two_way_mixed(m)
    except DegenerateError:
        return
    if base.degenerate or base.mse < 1e-6 * (np.abs(m).max() ** 2 + 1):
        return
    scaled = icc_two_way_mixed(a * m + c)
    assert scaled.icc_single == pytest.approx(base.icc_single, abs=1e-7)
    perm = icc_two_way_mixed(m[::-1, ::-1])
    assert perm.icc_single == pytest.approx(base.icc_single, abs=1e-9)
    assert -1.0 / (m.shape[1] - 1) - 1e-9 <= base.icc_single <= 1.0
