import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demogrowth.errors import DegenerateInput, InvalidSpec, SingularDesign
from demogrowth.ols import fit_ols
from demogrowth.series import AnnualSeries
from demogrowth.unitroot import (
    TrendSpec,
    adf_regression,
    adf_test,
    critical_value,
    critical_values,
    dfgls_test,
    gls_detrend,
    simulate_critical_value,
    simulate_statistics,
)

# Frozen on the bundled fixture's measured cohort; they agree with the arch
# package's ADF and DFGLS statistics to better than 1e-13.
FROZEN_ADF = {
    (0, "constant"): -1.972118073314598,
    (0, "none"): -0.5763484789029748,
    (0, "trend"): -3.2590031321926913,
    (1, "constant"): -1.7124719457802298,
    (2, "none"): -0.9245311824012268,
    (2, "trend"): -2.8979870310673257,
}
FROZEN_DFGLS = {
    (1, "constant"): -1.4735331036480215,
    (1, "trend"): -2.7381495180555855,
    (2, "constant"): -1.611057647853148,
    (2, "trend"): -2.974542626524485,
}


def random_walk(seed, n):
    return np.cumsum(np.random.default_rng(seed).standard_normal(n))


def ar1(seed, n, phi):
    e = np.random.default_rng(seed).standard_normal(n)
    y = np.empty(n)
    y[0] = e[0] / np.sqrt(1 - phi * phi)
    for t in range(1, n):
        y[t] = phi * y[t - 1] + e[t]
    return y


def test_trend_spec_parse():
    assert TrendSpec.parse("c") is TrendSpec.CONSTANT
    assert TrendSpec.parse("nc") is TrendSpec.NONE
    assert TrendSpec.parse("ct") is TrendSpec.TREND
    with pytest.raises(InvalidSpec):
        TrendSpec.parse("quadratic")


@pytest.mark.parametrize("key", sorted(FROZEN_ADF))
def test_adf_frozen(fixture, key):
    lag, trend = key
    assert adf_test(fixture.n9_measured, lag, trend).statistic == pytest.approx(FROZEN_ADF[key], abs=1e-10)


@pytest.mark.parametrize("key", sorted(FROZEN_DFGLS))
def test_dfgls_frozen(fixture, key):
    lag, trend = key
    assert dfgls_test(fixture.n9_measured, lag, trend).statistic == pytest.approx(FROZEN_DFGLS[key], abs=1e-10)


def test_adf_equals_hand_assembled_regression():
    y = random_walk(7, 200)
    res = adf_test(y, 0, "constant")
    d = np.diff(y)
    fit = fit_ols(d, y[:-1])
    assert res.statistic == pytest.approx(fit.t_statistics[0], abs=1e-10)
    assert res.n_obs == 199
    y = random_walk(8, 120)
    res = adf_test(y, 2, "trend")
    dy = np.diff(y)
    X = np.column_stack([y[2:-1], dy[1:-1], dy[:-2], np.arange(3, 120)])
    assert res.statistic == pytest.approx(fit_ols(dy[2:], X).t_statistics[0], abs=1e-10)


def test_adf_regression_layout():
    y = np.arange(10.0) ** 2
    dep, X = adf_regression(y, 2, TrendSpec.NONE)
    assert dep.shape == (7,) and X.shape == (7, 3)
    assert X[0, 0] == y[2] and X[0, 1] == y[2] - y[1] and X[0, 2] == y[1] - y[0]


def test_gls_detrend_matches_explicit_recursion():
    y = random_walk(3, 60)
    T = y.size
    a = 1 - 7.0 / T
    yq = [y[0]] + [y[t] - a * y[t - 1] for t in range(1, T)]
    zq = [1.0] + [1 - a] * (T - 1)
    mu = np.dot(zq, yq) / np.dot(zq, zq)
    np.testing.assert_allclose(gls_detrend(y, "constant"), y - mu, rtol=1e-12)
    a = 1 - 13.5 / T
    t = np.arange(1, T + 1.0)
    Z = np.column_stack([np.ones(T), t])
    Zq = np.vstack([Z[0], Z[1:] - a * Z[:-1]])
    yq = np.concatenate(([y[0]], y[1:] - a * y[:-1]))
    coef = np.linalg.solve(Zq.T @ Zq, Zq.T @ yq)
    np.testing.assert_allclose(gls_detrend(y, "trend"), y - Z @ coef, rtol=1e-10)


def test_result_fields_and_verdict():
    res = adf_test(ar1(1, 200, 0.2), 0, "constant")
    cv = res.critical_values
    assert cv["1%"] < cv["5%"] < cv["10%"]
    assert res.reject_at == "1%" and res.rejects("1%")
    res = adf_test(random_walk(2, 100), 0, "constant")
    assert (res.reject_at is None) == (res.statistic >= res.critical_values["10%"])


def test_errors():
    with pytest.raises(DegenerateInput):
        adf_test(np.arange(8.0), 1)
    with pytest.raises(SingularDesign):
        adf_test(np.full(30, 5.0), 0, "constant")
    with pytest.raises(InvalidSpec):
        dfgls_test(random_walk(1, 50), 1, "none")
    with pytest.raises(DegenerateInput):
        dfgls_test(random_walk(1, 10), 1)
    with pytest.raises(DegenerateInput):
        critical_value("adf", "constant", 10, "5%")
    with pytest.raises(InvalidSpec):
        critical_value("kpss", "constant", 50, "5%")
    with pytest.raises(InvalidSpec):
        critical_value("adf", "constant", 50, "2%")
    with pytest.raises(DegenerateInput):
        simulate_critical_value("adf", "none", 41, "1%", replications=500)


def test_table_examples():
    assert critical_value("adf", "constant", 40, "1%") == pytest.approx(-3.65, abs=0.10)
    assert critical_value("adf", "none", 40, "1%") == pytest.approx(-2.64, abs=0.05)
    # Tabulated Fuller entries are reproduced exactly at the grid points.
    assert critical_values("adf", "constant", 100) == {"1%": -3.51, "5%": -2.89, "10%": -2.58}


def test_adf_and_dfgls_critical_values_monotone_in_n():
    for test, trend in [("adf", "none"), ("adf", "constant"), ("adf", "trend"), ("dfgls", "constant"), ("dfgls", "trend")]:
        vals = [critical_value(test, trend, n, "5%") for n in (20, 40, 80, 160, 400)]
        assert vals == sorted(vals)


def test_simulation_deterministic_and_chunk_independent():
    a = simulate_statistics("adf", "none", 41, 3000, seed=5, chunk=1000)
    b = simulate_statistics("adf", "none", 41, 3000, seed=5, chunk=700)
    assert np.array_equal(a, b)
    assert simulate_critical_value("dfgls", "constant", 41, "5%", 2000, seed=1) == simulate_critical_value(
        "dfgls", "constant", 41, "5%", 2000, seed=1
    )


def test_batched_statistics_match_single_series_tests():
    draws = simulate_statistics("adf", "constant", 30, 5, seed=9, lag=1)
    draws_gls = simulate_statistics("dfgls", "trend", 30, 5, seed=9, lag=2)
    for i in range(5):
        y = np.cumsum(np.random.default_rng([9, i]).standard_normal(30))
        assert draws[i] == pytest.approx(adf_test(y, 1, "constant").statistic, abs=1e-10)
        assert draws_gls[i] == pytest.approx(dfgls_test(y, 2, "trend").statistic, abs=1e-10)


def test_simulation_converges():
    ref = simulate_critical_value("adf", "none", 41, "5%", 100_000, seed=11)
    small = [abs(simulate_critical_value("adf", "none", 41, "5%", 1000, seed=s) - ref) for s in range(8)]
    large = [abs(simulate_critical_value("adf", "none", 41, "5%", 20000, seed=100 + s) - ref) for s in range(8)]
    assert np.mean(large) < np.mean(small)


@pytest.mark.slow
@pytest.mark.parametrize(
    "test,trend",
    [("adf", "none"), ("adf", "constant"), ("adf", "trend"), ("dfgls", "constant"), ("dfgls", "trend")],
)
def test_embedded_tables_match_simulation(test, trend):
    lag = 1 if test == "dfgls" else 0
    for T in (41, 101):
        n_obs = T - 1 - lag
        for level in ("1%", "5%"):
            sim = simulate_critical_value(test, trend, T, level, 50_000, seed=2024)
            assert sim == pytest.approx(critical_value(test, trend, n_obs, level), abs=0.15)


def test_adf_power_ar02():
    rejections = sum(adf_test(ar1(s, 200, 0.2), 0, "constant").rejects("1%") for s in range(500))
    assert rejections >= 475


def test_dfgls_size_t150():
    rej = sum(dfgls_test(random_walk(s, 150), 1, "constant").rejects("5%") for s in range(1000))
    assert 20 <= rej <= 80


@settings(max_examples=200, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(1e-3, 1e3),
    st.floats(-1e4, 1e4),
    st.integers(0, 3),
)
def test_adf_affine_invariance(seed, a, b, lag):
    y = random_walk(seed, 60)
    base = adf_test(y, lag, "constant").statistic
    assert adf_test(a * y + b, lag, "constant").statistic == pytest.approx(base, abs=1e-8)
    base_none = adf_test(y, lag, "none").statistic
    assert adf_test(a * y, lag, "none").statistic == pytest.approx(base_none, abs=1e-8)


def test_accepts_annual_series(fixture):
    s = fixture.n9_measured
    assert adf_test(s, 1).statistic == adf_test(s.values, 1).statistic
    assert isinstance(s, AnnualSeries)
