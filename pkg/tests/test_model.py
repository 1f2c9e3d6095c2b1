import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demogrowth.errors import (
    AlignmentError,
    CalibrationError,
    DegenerateInput,
    DomainError,
    ModelBreakdown,
)
from demogrowth.model import (
    ModelParams,
    calibrate,
    forward_gdp,
    implied_gpc,
    predict_n9,
    trend_growth,
)
from demogrowth.series import AnnualSeries, growth_rate
from demogrowth.synthetic import TRUE_A, TRUE_N9_INITIAL, make_fixture


def test_params_validate():
    with pytest.raises(DomainError):
        ModelParams(0.0, 1.0, 2000)
    with pytest.raises(DomainError):
        ModelParams(1.0, -5.0, 2000)


def test_trend_growth_examples():
    t = trend_growth(AnnualSeries(2000, [10000.0, 20000.0]), 500.0)
    np.testing.assert_allclose(t.values, [0.05, 0.025])
    with pytest.raises(DomainError):
        trend_growth(AnnualSeries(2000, [1.0, -1.0]), 500.0)


def test_trend_growth_homogeneous():
    G = AnnualSeries(1960, np.linspace(2e4, 4e4, 30))
    # Exact for power-of-two factors, within rounding otherwise.
    assert np.array_equal(trend_growth(G, 4 * 200.0).values, 4 * trend_growth(G, 200.0).values)
    np.testing.assert_allclose(trend_growth(G, 3 * 200.0).values, 3 * trend_growth(G, 200.0).values, rtol=4e-16)


def test_linear_gdp_growth_matches_trend_up_to_discretisation():
    A, B = 547.1325, 20000.0
    G = AnnualSeries(1959, A * np.arange(44) + B)
    resid = growth_rate(G).values - trend_growth(G, A).values[:-1]
    # Forward ratio of an exact line equals A/G(t) with no remainder.
    np.testing.assert_allclose(resid, 0.0, atol=1e-15)
    # Against the end-of-step trend the gap is A^2 / (G(t) G(t+1)) = O(A/G^2).
    gap = growth_rate(G).values - trend_growth(G, A).values[1:]
    np.testing.assert_allclose(gap, A * A / (G.values[:-1] * G.values[1:]), rtol=1e-9)


def test_implied_gpc_examples():
    G = AnnualSeries(2000, [25000.0, 25000.0, 25000.0])
    g = implied_gpc(AnnualSeries(2000, [5.0, 5.0, 5.0]), G, 500.0)
    np.testing.assert_allclose(g.values, [0.02, 0.02])
    g = implied_gpc(AnnualSeries(2000, [5.0, 10.0, 10.0]), G, 500.0)
    assert g.values[0] == pytest.approx(0.52)
    with pytest.raises(AlignmentError):
        implied_gpc(AnnualSeries(2001, [5.0, 5.0, 5.0]), G, 500.0)


def test_predict_constant_when_growth_on_trend():
    G = AnnualSeries(1959, np.linspace(20000, 40000, 20))
    g = trend_growth(G, 547.0).window(1959, 1977)
    n9 = predict_n9(g, G, ModelParams(547.0, 3.9e6, 1959))
    assert len(n9) == 20 and n9.end_year == 1978
    np.testing.assert_allclose(n9.values, 3.9e6, rtol=1e-15)


def test_predict_breakdown():
    G = AnnualSeries(2000, [100.0, 100.0, 100.0])
    g = AnnualSeries(2000, [0.1, -0.6])
    with pytest.raises(ModelBreakdown, match="2001"):
        predict_n9(g, G, ModelParams(1.0, 10.0, 2000))


def test_predict_rejects_uncovered_initial_year():
    G = AnnualSeries(2000, [100.0, 100.0, 100.0])
    g = AnnualSeries(2000, [0.0, 0.0])
    with pytest.raises(AlignmentError):
        predict_n9(g, G, ModelParams(1.0, 10.0, 1990))


@settings(max_examples=200, deadline=None)
@given(
    st.integers(5, 100),
    st.integers(0, 2**32 - 1),
)
def test_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    n9 = AnnualSeries(1950, rng.uniform(1e5, 1e7, n))
    G = AnnualSeries(1950, rng.uniform(1e3, 1e5, n))
    A = float(rng.uniform(1.0, 1000.0))
    back = predict_n9(implied_gpc(n9, G, A), G, ModelParams(A, n9.values[0], 1950))
    np.testing.assert_allclose(back.values, n9.values, rtol=1e-10)


def test_forward_gdp_is_consistent_with_model(fixture):
    g = growth_rate(fixture.gdp_per_capita)
    implied = implied_gpc(fixture.n9_true, fixture.gdp_per_capita, TRUE_A)
    np.testing.assert_allclose(g.values, implied.values, rtol=1e-12)


def test_calibrate_noiseless_recovers_parameters():
    fx = make_fixture(noise_sd=0.0)
    g = growth_rate(fx.gdp_per_capita)
    fit = calibrate(g, fx.gdp_per_capita, fx.n9_measured, 1959)
    assert fit.params.A == pytest.approx(TRUE_A, rel=1e-6)
    assert fit.params.n9_initial == pytest.approx(TRUE_N9_INITIAL, rel=1e-6)
    assert fit.rms_difference < 1e-3 * TRUE_N9_INITIAL


def test_calibrate_is_idempotent(fixture):
    G = fixture.gdp_per_capita
    g = growth_rate(G)
    first = calibrate(g, G, fixture.n9_measured, 1959)
    predicted = predict_n9(g, G, first.params)
    again = calibrate(g, G, predicted, 1959)
    assert again.params.A == pytest.approx(first.params.A, rel=1e-6)
    assert again.params.n9_initial == pytest.approx(first.params.n9_initial, rel=1e-6)


def test_fit_report_invariants(fixture):
    G = fixture.gdp_per_capita
    fit = calibrate(growth_rate(G), G, fixture.n9_measured, 1959, fit_start=1962)
    assert abs(fit.mean_difference) < 0.5
    assert fit.sd_difference >= 0
    assert fit.rms_difference >= abs(fit.mean_difference)
    assert (fit.fit_start, fit.fit_end, fit.n_obs) == (1962, 2002, 41)


@pytest.mark.slow
def test_calibrate_noise_study():
    sds, means = [], []
    for seed in range(100):
        fx = make_fixture(seed, noise_sd=1e5)
        G = fx.gdp_per_capita
        fit = calibrate(growth_rate(G), G, fx.n9_measured, 1959)
        means.append(fit.mean_difference)
        sds.append(fit.sd_difference)
    assert max(abs(m) for m in means) < 0.5
    assert np.mean(sds) == pytest.approx(1e5, rel=0.2)


def test_calibrate_errors(fixture):
    G = fixture.gdp_per_capita
    g = growth_rate(G)
    with pytest.raises(CalibrationError):
        calibrate(g, G, fixture.n9_measured, 1959, a_bounds=(10.0, 5.0))
    with pytest.raises(CalibrationError) as exc:
        calibrate(g, G, fixture.n9_measured, 1959, a_bounds=(5e4, 6e4))
    assert isinstance(exc.value.trace, list)
    with pytest.raises(DegenerateInput):
        calibrate(g, G, fixture.n9_measured, 1959, fit_start=1999)


def test_forward_gdp_adds_increment_for_constant_cohort():
    G = forward_gdp(AnnualSeries(2000, [7.0] * 4), 500.0, 1000.0)
    np.testing.assert_allclose(G.values, [1000, 1500, 2000, 2500])
