import numpy as np
import pytest

from demogrowth.errors import DegenerateInput
from demogrowth.ols import fit_ols
from demogrowth.series import AnnualSeries
from demogrowth.var import (
    companion_matrix,
    diagnose,
    fit_var,
    forecast,
    joint_normality,
    lm_autocorr,
    select_lag,
    stability,
)


def simulate_var(A_list, n_obs, seed, burn=100, noise=None):
    rng = np.random.default_rng(seed)
    n = A_list[0].shape[0]
    p = len(A_list)
    e = rng.standard_normal((n_obs + burn, n)) if noise is None else noise
    y = np.zeros((n_obs + burn, n))
    for t in range(p, n_obs + burn):
        y[t] = sum(A_list[j] @ y[t - 1 - j] for j in range(p)) + e[t]
    return [AnnualSeries(1800, y[burn:, i]) for i in range(n)]


A1 = np.array([[0.5, 0.1], [0.2, 0.3]])
A2_FIRST = np.array([[0.3, 0.0], [0.1, 0.2]])
A2_SECOND = np.array([[0.4, 0.0], [0.0, 0.35]])


def test_noiseless_ar1():
    y = AnnualSeries(1900, 0.5 ** np.arange(30) * 1000.0)
    fit = fit_var([y], 1)
    assert fit.coefs[0][0, 0] == pytest.approx(0.5, abs=1e-10)
    assert fit.per_equation_rmse[0] == pytest.approx(0.0, abs=1e-8)
    assert fit.per_equation_r2[0] == pytest.approx(1.0)


def test_var1_recovery():
    # Persistent regressors keep coefficient standard errors near 0.02 at
    # T=500; the elementwise 0.05 band then holds for roughly 93% of seeds.
    A = np.array([[0.95, 0.02], [0.0, 0.9]])
    data = simulate_var([A], 500, seed=3)
    fit = fit_var(data, 1)
    np.testing.assert_allclose(fit.coefs[0], A, atol=0.05)
    assert fit.residuals.shape == (499, 2) and fit.n_obs == 499
    assert fit.start_year == 1801


def test_univariate_var_matches_ols(rng):
    y = np.cumsum(rng.standard_normal(80)) * 0.1 + rng.standard_normal(80)
    fit = fit_var([AnnualSeries(1900, y)], 2)
    ref = fit_ols(y[2:], np.column_stack([y[1:-1], y[:-2]]))
    np.testing.assert_allclose(
        [fit.coefs[0][0, 0], fit.coefs[1][0, 0], fit.intercept[0]], ref.coefficients, rtol=1e-10
    )
    np.testing.assert_allclose(fit.coefs_se[0][0, 0], ref.standard_errors[0], rtol=1e-10)


def test_residuals_orthogonal_to_regressors():
    fit = fit_var(simulate_var([A1], 200, seed=4), 2)
    for i in range(fit.n_vars):
        e = fit.residuals[:, i]
        for col in fit.design.T:
            assert abs(col @ e) / (np.linalg.norm(col) * np.linalg.norm(e)) < 1e-8


def test_varx_layout(rng):
    x = AnnualSeries(1900, rng.standard_normal(60))
    y = AnnualSeries(1900, 0.7 * x.values + rng.standard_normal(60) * 0.1)
    fit = fit_var([y], 2, exog=x, exog_lags=(0, 1))
    assert fit.exog_coefs.shape == (1, 2)
    assert fit.exog_coefs[0, 0] == pytest.approx(0.7, abs=0.05)
    assert fit.design.shape == (58, 2 + 2 + 1)


def test_fit_var_errors():
    short = [AnnualSeries(1900, np.arange(12.0) ** 1.5), AnnualSeries(1900, np.sin(np.arange(12.0)))]
    with pytest.raises(DegenerateInput):
        fit_var(short, 2)
    with pytest.raises(DegenerateInput):
        fit_var(short, 0)


def test_select_lag_matches_fit_var_formula():
    data = simulate_var([A2_FIRST, A2_SECOND], 120, seed=5)
    sel = select_lag(data, 4)
    T = sel.n_obs
    n = 2
    for p in (1, 2, 3):
        window = [s.window(s.start_year + 4 - p) for s in data]
        fit = fit_var(window, p)
        assert fit.n_obs == T
        logdet = np.linalg.slogdet(fit.sigma_ml)[1]
        ll = -0.5 * T * (n * (1 + np.log(2 * np.pi)) + logdet)
        k = n * (n * p + 1)
        assert sel.aic[p] == pytest.approx(-2 * ll / T + 2 * k / T, rel=1e-8)
        assert sel.sbic[p] == pytest.approx(-2 * ll / T + np.log(T) * k / T, rel=1e-8)
        assert sel.log_likelihood[p] == pytest.approx(ll, rel=1e-8)
    assert sel.lr[0] is None and sel.lags == [0, 1, 2, 3, 4]


def test_select_lag_chosen_is_argmin():
    sel = select_lag(simulate_var([A1], 100, seed=6), 4)
    for name in ("aic", "hqic", "sbic", "fpe"):
        vals = getattr(sel, name)
        assert sel.chosen[name] == min(range(1, 5), key=lambda p: vals[p])
    sig = [p for p in range(1, 5) if sel.lr_pvalue[p] < 0.05]
    assert sel.chosen["lr"] == (max(sig) if sig else 1)


def test_select_lag_recovers_var2():
    aic = hqic = 0
    for seed in range(200):
        sel = select_lag(simulate_var([A2_FIRST, A2_SECOND], 400, seed=seed), 4)
        aic += sel.chosen["aic"] == 2
        hqic += sel.chosen["hqic"] == 2
    assert aic >= 160 and hqic >= 160


def test_select_lag_too_large():
    with pytest.raises(DegenerateInput):
        select_lag(simulate_var([A1], 20, seed=1), 8)


def test_stability_examples():
    assert np.allclose(np.abs(np.linalg.eigvals(companion_matrix([0.5 * np.eye(3)]))), 0.5)
    a1, a2 = 0.6, 0.25
    mods = np.sort(np.abs(np.linalg.eigvals(companion_matrix([np.array([[a1]]), np.array([[a2]])]))))[::-1]
    roots = np.roots([-a2, -a1, 1.0])
    np.testing.assert_allclose(mods, np.sort(1 / np.abs(roots))[::-1], rtol=1e-12)


def test_stability_of_fit_and_forecast_convergence():
    fit = fit_var(simulate_var([A1], 300, seed=8), 1)
    mods = stability(fit)
    assert np.all(np.diff(mods) <= 0) and mods[0] < 1
    mean = np.linalg.solve(np.eye(2) - fit.coefs[0], fit.intercept)
    start = mean + np.array([5.0, -3.0])
    path = forecast(fit, start[None, :], 200)
    assert np.linalg.norm(path[-1] - mean) < 1e-6 * np.linalg.norm(start - mean)


def test_lm_autocorr_size_and_power():
    size = sum(lm_autocorr(fit_var(simulate_var([A1], 500, seed=s), 1), 1)[1] < 0.05 for s in range(500))
    assert 10 <= size <= 40
    power = 0
    for s in range(200):
        rng = np.random.default_rng(10_000 + s)
        e = rng.standard_normal((600, 2))
        for t in range(1, 600):
            e[t] += 0.6 * e[t - 1]
        power += lm_autocorr(fit_var(simulate_var([A1], 500, seed=s, noise=e), 1), 1)[1] < 0.05
    assert power >= 180


def test_lm_autocorr_hand_assembled():
    fit = fit_var(simulate_var([A1], 80, seed=12), 1)
    U = fit.residuals
    T, n = U.shape
    lagged = np.vstack([np.zeros((1, n)), U[:-1]])
    W = np.column_stack([fit.design, lagged])
    E = U - W @ np.linalg.lstsq(W, U, rcond=None)[0]
    stat = (T - W.shape[1] - 0.5) * np.log(np.linalg.det(U.T @ U) / np.linalg.det(E.T @ E))
    assert lm_autocorr(fit, 1)[0] == pytest.approx(stat, rel=1e-10)


def test_lm_autocorr_errors():
    fit = fit_var(simulate_var([A1], 40, seed=1), 1)
    with pytest.raises(DegenerateInput):
        lm_autocorr(fit, 0)


def test_joint_normality_univariate_equals_jarque_bera(rng):
    from demogrowth.ols import jarque_bera

    u = rng.standard_exponential(300)
    jn = joint_normality(u[:, None])
    assert jn.df == 2
    assert jn.statistic == pytest.approx(jarque_bera(u).statistic, rel=1e-10)


def test_diagnose_bundle():
    fit = fit_var(simulate_var([A1], 200, seed=2), 2)
    rep = diagnose(fit, (1, 2, 3))
    assert set(rep.lm_by_lag) == {1, 2, 3}
    assert all(0 <= p <= 1 for _, p in rep.lm_by_lag.values())
    assert len(rep.jarque_bera) == 2 and rep.jarque_bera_joint.df == 4
    assert rep.stable and rep.companion_moduli.size == 4
