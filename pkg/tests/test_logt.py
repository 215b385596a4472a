import math

import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, settings
from hypothesis import strategies as st

from clubconv.exceptions import (
    ConstantRegressor,
    LagTooLarge,
    WindowTooShort,
    ZeroCrossSectionMean,
    ZeroVariancePeriod,
)
from clubconv.logt import (
    Classification,
    LogTConfig,
    TrimConvention,
    classify,
    compute_transition_paths,
    hac_variance,
    logt_regression,
    logt_test,
    newey_west_lag,
    ols_fit,
    trim_start,
)
from clubconv.synth import SyntheticSpec, generate_panel

from .conftest import log_panel
from .oracles import bartlett_slope_se, normal_equations, transition_paths


def test_identical_series_give_unit_h_and_zero_H():
    y = np.tile([4.6, 4.5, 4.4, 4.3, 4.2], (3, 1))
    paths = compute_transition_paths(y)
    assert np.all(paths.h == 1.0)
    assert np.all(paths.H == 0.0)


def test_two_unit_hand_example():
    paths = compute_transition_paths([[2.0, 4.0], [4.0, 4.0]])
    np.testing.assert_allclose(paths.h, [[2 / 3, 1.0], [4 / 3, 1.0]], rtol=1e-15)
    # mean of (h - 1)^2 over the two units: (1/9 + 1/9) / 2
    np.testing.assert_allclose(paths.H, [1 / 9, 0.0], rtol=1e-15, atol=0)


def test_paths_match_loop_oracle(rng):
    y = rng.uniform(1, 6, size=(9, 14))
    paths = compute_transition_paths(y)
    h, H = transition_paths(y)
    np.testing.assert_allclose(paths.h, h, rtol=1e-13)
    np.testing.assert_allclose(paths.H, H, rtol=1e-12)


def test_zero_cross_section_mean():
    with pytest.raises(ZeroCrossSectionMean):
        compute_transition_paths([[1.0, 2.0], [-1.0, 3.0]])


@pytest.mark.parametrize(
    "T, convention, start",
    [
        (27, TrimConvention.FLOOR_RT_PLUS_1, 9),
        (27, TrimConvention.FLOOR_RT, 8),
        (13, TrimConvention.FLOOR_RT_PLUS_1, 4),
        (13, TrimConvention.FLOOR_RT, 3),
        (10, TrimConvention.FLOOR_RT, 3),
        (5, TrimConvention.FLOOR_RT, 2),
        (5, TrimConvention.FLOOR_RT_PLUS_1, 2),
    ],
)
def test_trim_start(T, convention, start):
    assert trim_start(T, 0.3, convention) == start


def test_window_for_1991_2017_panel():
    # 27 screened periods: default start is 1999, the literal [rT] start is 1998
    rng = np.random.default_rng(0)
    y = 4 + rng.uniform(0, 1, (6, 27))
    labels = list(range(1991, 2018))
    paths = compute_transition_paths(y)
    assert logt_regression(paths, LogTConfig(), labels).window == (1999, 2017)
    lit = LogTConfig(trim_convention="floor_rT")
    assert logt_regression(paths, lit, labels).window == (1998, 2017)
    assert len(logt_regression(paths, LogTConfig()).residuals) == 19


def test_ols_exact_line():
    a, b, e = ols_fit([1, 2, 3], [2, 4, 6])
    assert a == pytest.approx(0, abs=1e-14) and b == pytest.approx(2)
    np.testing.assert_allclose(e, 0, atol=1e-14)


def test_ols_flat_line():
    a, b, e = ols_fit([1, 2], [5, 5])
    assert (a, b) == (5.0, 0.0)


def test_ols_constant_regressor():
    with pytest.raises(ConstantRegressor):
        ols_fit([3, 3, 3], [1, 2, 3])


def test_ols_random_instance_matches_normal_equations(rng):
    x = rng.uniform(1, 4, 20)
    y = rng.normal(size=20)
    a, b, _ = ols_fit(x, y)
    a0, b0 = normal_equations(x, y)
    assert a == pytest.approx(a0, abs=1e-10)
    assert b == pytest.approx(b0, abs=1e-10)


def test_hac_lag_zero_is_hc0(rng):
    x = np.log(np.arange(9, 28.0))
    y = rng.normal(size=x.size)
    _, _, e = ols_fit(x, y)
    ref = sm.OLS(y, sm.add_constant(x)).fit(cov_type="HC0")
    assert hac_variance(e, x, 0) == pytest.approx(ref.bse[1], rel=1e-10)


def test_hac_matches_statsmodels_bartlett(rng):
    x = np.log(np.arange(9, 28.0))
    y = np.cumsum(rng.normal(size=x.size))
    _, _, e = ols_fit(x, y)
    for lag in (1, 2, 5):
        ref = sm.OLS(y, sm.add_constant(x)).fit(
            cov_type="HAC", cov_kwds={"maxlags": lag, "use_correction": False}
        )
        assert hac_variance(e, x, lag) == pytest.approx(ref.bse[1], rel=1e-10)


def test_hac_fixed_ten_points_lag_two():
    x = np.arange(1.0, 11.0)
    y = np.array([1.2, 0.7, 2.9, 3.1, 3.0, 4.8, 5.5, 5.1, 7.2, 6.9])
    _, _, e = ols_fit(x, y)
    assert hac_variance(e, x, 2) == pytest.approx(bartlett_slope_se(list(e), list(x), 2), abs=1e-10)


def test_hac_lag_too_large():
    with pytest.raises(LagTooLarge):
        hac_variance([0.1, -0.1, 0.2], [1.0, 2.0, 3.0], 3)


def test_newey_west_lag_rule():
    assert newey_west_lag(19) == 2
    assert newey_west_lag(100) == 4


def test_hac_close_to_classical_se_for_iid_errors():
    ratios = []
    for seed in range(200):
        r = np.random.default_rng(seed)
        x = np.log(np.arange(50, 550.0))
        y = 1.0 + 0.5 * x + r.normal(size=x.size)
        _, _, e = ols_fit(x, y)
        ref = sm.OLS(y, sm.add_constant(x)).fit()
        ratios.append(hac_variance(e, x, "auto") / ref.bse[1])
    assert abs(np.mean(ratios) - 1.0) < 0.25


@pytest.mark.parametrize(
    "b, t, expected",
    [
        (0.092, 0.675, Classification.CONDITIONAL),
        (2.392, 1.711, Classification.ABSOLUTE),
        (-0.504, -13.953, Classification.REJECT),
        (-1.045, -0.579, Classification.NEGATIVE_B),
        (2.0, -1.65, Classification.ABSOLUTE),
        (0.0, 0.0, Classification.CONDITIONAL),
        (5.0, -1.66, Classification.REJECT),
        (0.1, math.nan, Classification.REJECT),
    ],
)
def test_classify(b, t, expected):
    assert classify(b, t) is expected


def test_alpha_is_half_of_b():
    assert 0.092 / 2 == pytest.approx(0.046)
    paths = compute_transition_paths(generate_panel(SyntheticSpec(seed=4))[0].values)
    res = logt_regression(paths)
    assert res.alpha_hat == res.b_hat / 2


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50, allow_nan=False), st.floats(-50, 50, allow_nan=False))
def test_classification_is_total(b, t):
    cls = classify(b, t)
    assert cls in set(Classification)
    assert (cls is Classification.REJECT) == (t < -1.65)


def test_zero_variance_in_window():
    y = np.array([[1.0, 2, 3, 4, 5, 6], [2.0, 2, 3, 4, 5, 7]])
    with pytest.raises(ZeroVariancePeriod):
        logt_test(y)


def test_zero_variance_first_period():
    y = np.array([[1.0, 2, 3, 4, 5, 6], [1.0, 3, 3.5, 4, 5, 7]])
    with pytest.raises(ZeroVariancePeriod, match="first"):
        logt_test(y)


def test_window_too_short():
    paths = compute_transition_paths(np.array([[1.0, 2.0], [2.0, 3.0]]))
    with pytest.raises(WindowTooShort):
        logt_regression(paths)


def test_convergent_panels_rarely_reject():
    rejections = sum(
        logt_test(generate_panel(SyntheticSpec(alpha=0.5, noise_sigma=0.01, seed=s))[0]).rejected
        for s in range(500)
    )
    assert rejections <= 25


def test_divergent_panels_reject():
    spec = dict(club_sizes=(14, 14), delta_levels=(1.0, 2.0), alpha=0.5, noise_sigma=0.01)
    rejections = sum(
        logt_test(generate_panel(SyntheticSpec(seed=s, **spec))[0]).rejected for s in range(500)
    )
    assert rejections >= 475


def _random_panel(seed):
    r = np.random.default_rng(seed)
    n, T = r.integers(2, 12), r.integers(6, 30)
    return 1.0 + r.uniform(0, 3, (n, T))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 20.0))
def test_scale_invariance(seed, c):
    y = _random_panel(seed)
    a = logt_test(y)
    b = logt_test(c * y)
    assert b.b_hat == pytest.approx(a.b_hat, abs=1e-9)
    assert b.a_hat == pytest.approx(a.a_hat, abs=1e-9)
    assert b.t_stat == pytest.approx(a.t_stat, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_permutation_invariance_is_exact(seed, random):
    y = _random_panel(seed)
    perm = list(range(y.shape[0]))
    random.shuffle(perm)
    a = logt_test(y)
    b = logt_test(y[perm])
    assert a == b
    np.testing.assert_array_equal(compute_transition_paths(y[perm]).H, compute_transition_paths(y).H)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_mean_one_identity(seed):
    y = _random_panel(seed)
    paths = compute_transition_paths(y)
    np.testing.assert_allclose(paths.h.sum(axis=0), y.shape[0], rtol=1e-10)
    assert np.all(paths.H >= 0)


def test_logt_on_panel_reports_period_window():
    panel = log_panel(generate_panel(SyntheticSpec(seed=2))[0].values, periods=list(range(1991, 2018)))
    res = logt_test(panel)
    assert res.window == (1999, 2017)
    assert res.lag == 2 and res.n_units == 28
