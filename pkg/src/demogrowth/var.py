"""VAR/VARX estimation, lag-order selection, stability and residual diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from demogrowth.errors import DegenerateInput
from demogrowth.ols import NormalityResult, chi2_sf, fit_ols, jarque_bera
from demogrowth.series import AnnualSeries, require_aligned

__all__ = [
    "VarFit",
    "LagSelection",
    "DiagnosticsReport",
    "fit_var",
    "select_lag",
    "stability",
    "companion_matrix",
    "lm_autocorr",
    "joint_normality",
    "diagnose",
    "forecast",
]


@dataclass(frozen=True, eq=False)
class VarFit:
    """Per-equation least-squares VAR(p), optionally with exogenous regressors.

    ``coefs[j][i, k]`` is the effect of variable ``k`` at lag ``j + 1`` on
    equation ``i``.  ``design`` holds the regressors in the column order
    ``[lag 1 block, ..., lag p block, exogenous lags, constant]``.
    """

    coefs: list[np.ndarray]
    coefs_se: list[np.ndarray]
    exog_coefs: np.ndarray | None
    exog_se: np.ndarray | None
    exog_lags: tuple[int, ...]
    intercept: np.ndarray
    intercept_se: np.ndarray
    residuals: np.ndarray
    per_equation_r2: np.ndarray
    per_equation_rmse: np.ndarray
    lag_order: int
    n_obs: int
    start_year: int
    design: np.ndarray = field(repr=False)

    @property
    def n_vars(self) -> int:
        return self.residuals.shape[1]

    @property
    def sigma_ml(self) -> np.ndarray:
        return self.residuals.T @ self.residuals / self.n_obs


def _stack(data: Sequence[AnnualSeries]) -> np.ndarray:
    data = list(data)
    if not data:
        raise DegenerateInput("no series given")
    require_aligned(*data)
    return np.column_stack([s.values for s in data])


def _lag_block(Y: np.ndarray, p: int, start: int) -> np.ndarray:
    T = Y.shape[0]
    if p == 0:
        return np.empty((T - start, 0))
    return np.column_stack([Y[start - j : T - j] for j in range(1, p + 1)])


def fit_var(
    data: Sequence[AnnualSeries],
    lag_order: int,
    exog: AnnualSeries | None = None,
    exog_lags: Sequence[int] = (0,),
) -> VarFit:
    """Fit a VAR(``lag_order``) with intercept, or a VARX when ``exog`` is given.

    The estimation sample starts after the longest lag (endogenous or
    exogenous), so every regressor is observed.
    """
    Y = _stack(data)
    T, n = Y.shape
    if lag_order < 1:
        raise DegenerateInput(f"lag order must be at least 1, got {lag_order}")
    if T < n * lag_order + 10:
        raise DegenerateInput(
            f"{T} observations too few for a {n}-variable VAR({lag_order})"
        )
    exog_lags = tuple(int(l) for l in exog_lags) if exog is not None else ()
    if exog is not None:
        require_aligned(data[0], exog)
        if not exog_lags or min(exog_lags) < 0:
            raise DegenerateInput("exogenous lags must be non-negative")
    start = max((lag_order, *exog_lags))
    X = _lag_block(Y, lag_order, start)
    if exog is not None:
        x = exog.values
        X = np.column_stack([X] + [x[start - l : T - l] for l in exog_lags])
    dep = Y[start:]
    fits = [fit_ols(dep[:, i], X, intercept=True) for i in range(n)]
    coefs = np.array([f.coefficients for f in fits])
    ses = np.array([f.standard_errors for f in fits])
    lag_cols = n * lag_order
    ne = len(exog_lags)
    return VarFit(
        coefs=[coefs[:, j * n : (j + 1) * n] for j in range(lag_order)],
        coefs_se=[ses[:, j * n : (j + 1) * n] for j in range(lag_order)],
        exog_coefs=coefs[:, lag_cols : lag_cols + ne] if ne else None,
        exog_se=ses[:, lag_cols : lag_cols + ne] if ne else None,
        exog_lags=exog_lags,
        intercept=coefs[:, -1],
        intercept_se=ses[:, -1],
        residuals=np.column_stack([f.residuals for f in fits]),
        per_equation_r2=np.array([f.r_squared for f in fits]),
        per_equation_rmse=np.array([f.rmse for f in fits]),
        lag_order=lag_order,
        n_obs=dep.shape[0],
        start_year=data[0].start_year + start,
        design=np.column_stack([X, np.ones(dep.shape[0])]),
    )


@dataclass(frozen=True)
class LagSelection:
    """Information criteria for VAR(0..max_lag) on a common sample.

    Row ``p`` of each criterion belongs to lag ``p``; lag 0 (constant only)
    is included so that the lag-1 likelihood-ratio test has a baseline, but
    only lags ``1..max_lag`` are candidates.
    """

    lags: list[int]
    lr: list[float | None]
    lr_pvalue: list[float | None]
    fpe: list[float]
    aic: list[float]
    hqic: list[float]
    sbic: list[float]
    log_likelihood: list[float]
    chosen: dict[str, int]
    consensus: int
    n_obs: int
    start_year: int


def _logdet_ml(resid: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(resid.T @ resid / resid.shape[0])
    if sign <= 0:
        raise DegenerateInput("residual covariance is singular")
    return float(logdet)


def select_lag(data: Sequence[AnnualSeries], max_lag: int = 4, signif: float = 0.05) -> LagSelection:
    """Pre-estimation lag-order statistics.

    With ``T`` common observations, ``n`` variables and ``k = n (n p + 1)``
    coefficients at lag ``p``::

        LL   = -T/2 (n (1 + ln 2 pi) + ln det Sigma_p)
        AIC  = -2 LL / T + 2 k / T
        HQIC = -2 LL / T + 2 ln(ln T) k / T
        SBIC = -2 LL / T + ln(T) k / T
        FPE  = det Sigma_p ((T + n p + 1) / (T - n p - 1))^n
        LR_p = (T - n p - 1) (ln det Sigma_{p-1} - ln det Sigma_p)  ~ chi2(n^2)

    ``Sigma_p`` is the maximum-likelihood residual covariance.  The LR choice
    is the largest lag whose test is significant at ``signif``.
    """
    Y = _stack(data)
    T_all, n = Y.shape
    if max_lag < 1:
        raise DegenerateInput("max_lag must be at least 1")
    T = T_all - max_lag
    if T - n * max_lag - 1 <= n:
        raise DegenerateInput(f"max_lag {max_lag} too large for {T_all} observations")
    dep = Y[max_lag:]
    lags = list(range(max_lag + 1))
    logdets, lls, fpe, aic, hqic, sbic = [], [], [], [], [], []
    for p in lags:
        X = np.column_stack([_lag_block(Y, p, max_lag), np.ones(T)])
        coef, *_ = np.linalg.lstsq(X, dep, rcond=None)
        ld = _logdet_ml(dep - X @ coef)
        k = n * (n * p + 1)
        ll = -0.5 * T * (n * (1.0 + np.log(2 * np.pi)) + ld)
        logdets.append(ld)
        lls.append(float(ll))
        aic.append(float(-2 * ll / T + 2 * k / T))
        hqic.append(float(-2 * ll / T + 2 * np.log(np.log(T)) * k / T))
        sbic.append(float(-2 * ll / T + np.log(T) * k / T))
        fpe.append(float(np.exp(ld) * ((T + n * p + 1) / (T - n * p - 1)) ** n))
    lr: list[float | None] = [None]
    lr_p: list[float | None] = [None]
    for p in lags[1:]:
        stat = (T - n * p - 1) * (logdets[p - 1] - logdets[p])
        lr.append(float(stat))
        lr_p.append(chi2_sf(stat, n * n))
    cand = lags[1:]
    chosen = {
        name: min(cand, key=lambda p, v=vals: (v[p], p))
        for name, vals in (("fpe", fpe), ("aic", aic), ("hqic", hqic), ("sbic", sbic))
    }
    sig = [p for p in cand if lr_p[p] < signif]
    chosen["lr"] = max(sig) if sig else 1
    votes = list(chosen.values())
    consensus = min(set(votes), key=lambda p: (-votes.count(p), p))
    return LagSelection(
        lags, lr, lr_p, fpe, aic, hqic, sbic, lls, chosen, consensus, T,
        data[0].start_year + max_lag,
    )


def companion_matrix(coefs: Sequence[np.ndarray]) -> np.ndarray:
    p = len(coefs)
    n = coefs[0].shape[0]
    top = np.column_stack(list(coefs))
    if p == 1:
        return top
    lower = np.column_stack([np.eye(n * (p - 1)), np.zeros((n * (p - 1), n))])
    return np.vstack([top, lower])


def stability(fit: VarFit) -> np.ndarray:
    """Moduli of the companion-matrix eigenvalues, largest first."""
    mod = np.abs(np.linalg.eigvals(companion_matrix(fit.coefs)))
    return np.sort(mod)[::-1]


def lm_autocorr(fit: VarFit, lag: int = 1) -> tuple[float, float]:
    """LM test for residual autocorrelation at ``lag``.

    Residuals are regressed on the VAR regressors plus the residuals shifted
    by ``lag`` (zeros before the sample).  With ``d`` regressors per
    auxiliary equation the statistic ``(T - d - 1/2) ln(det S / det S_aux)``
    is referred to chi2(n^2).
    """
    U = fit.residuals
    T, n = U.shape
    if lag < 1:
        raise DegenerateInput("LM lag must be positive")
    d = fit.design.shape[1] + n
    if lag >= T or T - d - 0.5 <= 0:
        raise DegenerateInput(f"LM lag {lag} leaves no degrees of freedom")
    shifted = np.zeros_like(U)
    shifted[lag:] = U[:-lag]
    W = np.column_stack([fit.design, shifted])
    coef, *_ = np.linalg.lstsq(W, U, rcond=None)
    E = U - W @ coef
    stat = (T - d - 0.5) * (_logdet_ml(U) - _logdet_ml(E))
    return float(stat), chi2_sf(stat, n * n)


@dataclass(frozen=True)
class JointNormality:
    statistic: float
    p_value: float
    df: int


def joint_normality(residuals: np.ndarray) -> JointNormality:
    """Multivariate Jarque-Bera on Cholesky-standardised residuals, chi2(2n)."""
    U = residuals - residuals.mean(axis=0)
    T, n = U.shape
    L = np.linalg.cholesky(U.T @ U / T)
    W = np.linalg.solve(L, U.T).T
    skew = np.mean(W**3, axis=0)
    kurt = np.mean(W**4, axis=0)
    stat = T / 6.0 * np.sum(skew**2) + T / 24.0 * np.sum((kurt - 3.0) ** 2)
    return JointNormality(float(stat), chi2_sf(stat, 2 * n), 2 * n)


@dataclass(frozen=True)
class DiagnosticsReport:
    lm_by_lag: dict[int, tuple[float, float]]
    jarque_bera: list[NormalityResult]
    jarque_bera_joint: JointNormality
    companion_moduli: np.ndarray

    @property
    def stable(self) -> bool:
        return bool(self.companion_moduli[0] < 1.0)


def diagnose(fit: VarFit, lm_lags: Sequence[int] = (1, 2)) -> DiagnosticsReport:
    return DiagnosticsReport(
        lm_by_lag={int(l): lm_autocorr(fit, l) for l in lm_lags},
        jarque_bera=[jarque_bera(fit.residuals[:, i]) for i in range(fit.n_vars)],
        jarque_bera_joint=joint_normality(fit.residuals),
        companion_moduli=stability(fit),
    )


def forecast(fit: VarFit, history: np.ndarray, steps: int) -> np.ndarray:
    """Deterministic multi-step forecast of an endogenous-only VAR.

    ``history`` holds at least ``lag_order`` most recent rows (oldest first).
    """
    if fit.exog_coefs is not None:
        raise DegenerateInput("forecasting a VARX needs future exogenous values")
    p = fit.lag_order
    hist = [np.asarray(r, dtype=float) for r in np.atleast_2d(history)[-p:]]
    if len(hist) < p:
        raise DegenerateInput(f"need {p} rows of history")
    out = np.empty((steps, fit.n_vars))
    for h in range(steps):
        nxt = fit.intercept + sum(fit.coefs[j] @ hist[-1 - j] for j in range(p))
        out[h] = nxt
        hist.append(nxt)
    return out
