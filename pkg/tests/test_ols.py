import numpy as np
import pytest
from scipy import stats

from demogrowth.errors import DegenerateInput, SingularDesign
from demogrowth.ols import chi2_sf, fit_ols, jarque_bera


def test_exact_line():
    x = np.arange(10.0)
    fit = fit_ols(2 * x + 1, x)
    np.testing.assert_allclose(fit.coefficients, [2.0, 1.0], atol=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.rmse == pytest.approx(0.0, abs=1e-12)
    assert fit.slope == pytest.approx(2.0)


def test_normal_equations_oracle():
    rng = np.random.default_rng(40)
    X = rng.normal(size=(40, 3))
    y = X @ [1.0, -2.0, 0.5] + 3.0 + rng.normal(size=40)
    fit = fit_ols(y, X)
    Z = np.column_stack([X, np.ones(40)])
    gram_inv = np.linalg.inv(Z.T @ Z)
    beta = gram_inv @ Z.T @ y
    e = y - Z @ beta
    s2 = e @ e / (40 - 4)
    np.testing.assert_allclose(fit.coefficients, beta, rtol=1e-10)
    np.testing.assert_allclose(fit.standard_errors, np.sqrt(s2 * np.diag(gram_inv)), rtol=1e-10)
    assert fit.rmse == pytest.approx(np.sqrt(s2), rel=1e-12)
    assert fit.r_squared == pytest.approx(1 - e @ e / np.sum((y - y.mean()) ** 2), rel=1e-12)


def test_frozen_regression():
    # Exact rational solution: slope 152/75, intercept -4/75.
    x = np.array([1.0, 2.0, 4.0, 5.0, 7.0, 8.0])
    y = np.array([2.1, 3.9, 8.2, 9.8, 14.1, 16.3])
    fit = fit_ols(y, x)
    ref, *_ = np.linalg.lstsq(np.column_stack([x, np.ones(6)]), y, rcond=None)
    np.testing.assert_allclose(fit.coefficients, ref, rtol=1e-12)
    np.testing.assert_allclose(fit.coefficients, [152 / 75, -4 / 75], rtol=1e-12)
    assert fit.n_obs == 6 and fit.n_params == 2


def test_invariants(rng):
    X = rng.normal(size=(60, 2))
    y = X @ [0.3, 0.7] + rng.normal(size=60)
    fit = fit_ols(y, X)
    Z = np.column_stack([X, np.ones(60)])
    e = fit.residuals
    for col in Z.T:
        assert abs(col @ e) / (np.linalg.norm(col) * np.linalg.norm(e)) < 1e-8
    np.testing.assert_allclose(fit.fitted + e, y, rtol=1e-10)
    np.testing.assert_allclose(fit.t_statistics, fit.coefficients / fit.standard_errors)
    scaled = fit_ols(5.0 * y - 3.0, X)
    assert scaled.r_squared == pytest.approx(fit.r_squared, rel=1e-10)
    np.testing.assert_allclose(scaled.coefficients[:2], 5 * fit.coefficients[:2], rtol=1e-10)


def test_no_intercept_r2_about_zero(rng):
    x = rng.normal(size=30)
    y = 2 * x + 10 + rng.normal(size=30)
    fit = fit_ols(y, x, intercept=False)
    assert fit.r_squared == pytest.approx(1 - fit.rss / (y @ y))
    assert fit.coefficients.shape == (1,)


def test_errors(rng):
    x = rng.normal(size=(20, 1))
    with pytest.raises(SingularDesign):
        fit_ols(rng.normal(size=20), np.column_stack([x, x]))
    with pytest.raises(DegenerateInput):
        fit_ols([1.0, 2.0], [1.0, 3.0])


def test_chi2_sf_matches_scipy():
    for x, df in [(0.5, 1), (5.99, 2), (7.06, 2), (20.0, 4), (3.0, 7.5)]:
        assert chi2_sf(x, df) == pytest.approx(stats.chi2.sf(x, df), abs=1e-12)
    assert chi2_sf(0.0, 2) == 1.0


def test_jarque_bera_symmetric_sample():
    # Symmetric with kurtosis exactly 3: mixing 0 and +/-a with the right weights.
    a = np.sqrt(3.0)
    x = np.array([-a, 0, 0, 0, 0, a] * 3)
    res = jarque_bera(x)
    assert res.skewness == pytest.approx(0.0, abs=1e-12)
    assert res.kurtosis == pytest.approx(3.0)
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value == pytest.approx(1.0)


def test_jarque_bera_matches_scipy(rng):
    x = rng.standard_exponential(200)
    res = jarque_bera(x)
    ref = stats.jarque_bera(x)
    assert res.statistic == pytest.approx(ref.statistic, rel=1e-10)
    assert res.p_value == pytest.approx(ref.pvalue, rel=1e-8)
    assert res.kurtosis == pytest.approx(stats.kurtosis(x, fisher=False), rel=1e-10)


def test_jarque_bera_errors():
    with pytest.raises(DegenerateInput):
        jarque_bera(np.ones(20))
    with pytest.raises(DegenerateInput):
        jarque_bera(np.arange(5.0))


def test_jarque_bera_size():
    hits = sum(jarque_bera(np.random.default_rng(s).standard_normal(1000)).statistic < 5.99 for s in range(500))
    assert hits >= 450
