import numpy as np
import oracles
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swaykit.core import DataError
from swaykit.stats import bland_altman, limits_of_agreement


def test_constant_offset(rng):
    a = rng.standard_normal(20)
    r = bland_altman(a, a + 7)
    assert r.bias == pytest.approx(-7, abs=1e-12)
    assert r.sd_diff == pytest.approx(0, abs=1e-12)
    assert r.outlier_indices == ()


def test_identical_channels(rng):
    a = rng.random(10)
    r = bland_altman(a, a)
    assert (r.bias, r.sd_diff, r.outlier_indices, r.prop_bias_p) == (0.0, 0.0, (), 1.0)


@pytest.mark.parametrize("bias,upper,lower", [
    (-853.49, 1100.98, -2807.97),  # AP sway path
    (-44.41, 54.61, -143.43),  # AP sway range
])
def test_published_limits(bias, upper, lower):
    sd = round((upper - bias) / 1.96, 2)
    lo, hi = limits_of_agreement(bias, sd)
    assert hi == pytest.approx(upper, abs=0.02)
    assert lo == pytest.approx(lower, abs=0.02)


def test_limits_formula_on_data(rng):
    a, b = rng.standard_normal(40), rng.standard_normal(40)
    r = bland_altman(a, b)
    d = (a - b).tolist()
    assert r.bias == pytest.approx(oracles.mean(d), abs=1e-14)
    assert r.sd_diff == pytest.approx(np.std(d, ddof=1), rel=1e-12)
    assert r.loa_upper - r.loa_lower == pytest.approx(2 * 1.96 * r.sd_diff, rel=1e-12)


def test_proportional_bias_detected():
    g = np.random.default_rng(3)
    truth = g.uniform(10, 100, 51)
    a = truth
    b = 1.3 * truth + g.normal(0, 1.0, 51)
    r = bland_altman(a, b)
    assert r.prop_bias_slope < 0 and r.prop_bias_p < 0.05
    # d strictly increasing in the pair mean
    r2 = bland_altman(1.3 * truth, truth)
    assert r2.prop_bias_slope > 0 and r2.prop_bias_p < 0.05


def test_no_proportional_bias_under_null():
    g = np.random.default_rng(11)
    pvals = []
    for _ in range(200):
        t = g.uniform(0, 10, 51)
        pvals.append(bland_altman(t + g.normal(0, 1, 51), t + g.normal(0, 1, 51)).prop_bias_p)
    assert 0.02 <= np.mean(np.array(pvals) < 0.05) <= 0.09


def test_slope_p_matches_scipy(rng):
    from scipy import stats

    a = rng.uniform(0, 10, 30)
    b = a * 1.05 + rng.standard_normal(30)
    r = bland_altman(a, b)
    ref = stats.linregress((a + b) / 2, a - b)
    assert r.prop_bias_slope == pytest.approx(ref.slope, rel=1e-10)
    assert r.prop_bias_intercept == pytest.approx(ref.intercept, rel=1e-9, abs=1e-12)
    assert r.prop_bias_p == pytest.approx(ref.pvalue, rel=1e-8)


def test_errors():
    with pytest.raises(DataError):
        bland_altman([1, 2], [1, 2])
    with pytest.raises(DataError):
        bland_altman([1, 2, 3], [1, 2])
    with pytest.raises(DataError):
        bland_altman([1, 2, np.inf], [1, 2, 3])


pairs = st.integers(3, 40).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, n, elements=st.floats(-1e3, 1e3))))


@settings(max_examples=80, deadline=None)
@given(pairs)
def test_swap_flips_sign_and_outliers_match_oracle(ab):
    a, b = ab
    r = bland_altman(a, b)
    s = bland_altman(b, a)
    assert s.bias == pytest.approx(-r.bias, abs=1e-9)
    assert s.sd_diff == pytest.approx(r.sd_diff, rel=1e-9, abs=1e-9)
    assert list(r.outlier_indices) == oracles.outliers((a - b).tolist(), r.loa_lower, r.loa_upper)
    assert r.loa_lower <= r.bias <= r.loa_upper
