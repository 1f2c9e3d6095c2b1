"""Engle-Granger residual tests, the Johansen trace test and VECM estimation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from demogrowth.errors import (
    DegenerateInput,
    InvalidSpec,
    PerfectCointegration,
    SingularSystem,
)
from demogrowth.ols import OlsFit, fit_ols
from demogrowth.series import AnnualSeries, require_aligned
from demogrowth.unitroot import LEVELS, TrendSpec, UnitRootResult, adf_test, dfgls_test

__all__ = [
    "EGResult",
    "JohansenResult",
    "VecmFit",
    "engle_granger",
    "johansen_trace",
    "trace_critical_values",
    "fit_vecm",
]


@dataclass(frozen=True)
class EGResult:
    step1: OlsFit
    residuals: AnnualSeries
    residual_tests: list[UnitRootResult]
    cointegrated_at: str | None


def engle_granger(y: AnnualSeries, x: AnnualSeries, max_lag: int = 3) -> EGResult:
    """Two-step Engle-Granger test of ``y`` against ``x``.

    Step one regresses ``y`` on ``x`` with an intercept.  Step two runs ADF
    (no deterministics, lags ``0..max_lag``) and DF-GLS (GLS demeaning, lags
    ``1..max_lag``) on the residuals.  ``cointegrated_at`` is the strictest
    level at which every residual test rejects a unit root.

    Raises
    ------
    PerfectCointegration
        If the first-step residuals vanish, e.g. when ``y`` equals ``x``.
    """
    require_aligned(y, x)
    if len(y) < 15:
        raise DegenerateInput(f"Engle-Granger needs at least 15 observations, got {len(y)}")
    step1 = fit_ols(y.values, x.values, intercept=True)
    tss = float(np.sum((y.values - y.values.mean()) ** 2))
    if step1.rss <= 1e-20 * max(tss, float(y.values @ y.values)):
        raise PerfectCointegration(
            "first-step residuals are identically zero: the series are perfectly "
            "cointegrated and residual unit-root tests are undefined"
        )
    resid = AnnualSeries(y.start_year, step1.residuals, y.unit)
    tests = [adf_test(resid, p, TrendSpec.NONE) for p in range(max_lag + 1)]
    tests += [dfgls_test(resid, p, TrendSpec.CONSTANT) for p in range(1, max_lag + 1)]
    level = None
    for lv in LEVELS:
        if all(t.rejects(lv) for t in tests):
            level = lv
            break
    return EGResult(step1, resid, tests, level)


# Trace-test quantiles (Osterwald-Lenum, 1992), indexed by n - r, columns 90/95/99%.
_TRACE_CV = {
    TrendSpec.NONE: np.array(
        [
            [2.86, 3.84, 6.51],
            [10.47, 12.53, 16.31],
            [21.63, 24.31, 29.75],
            [36.58, 39.89, 45.58],
            [55.44, 59.46, 66.52],
        ]
    ),
    TrendSpec.CONSTANT: np.array(
        [
            [2.69, 3.76, 6.65],
            [13.33, 15.41, 20.04],
            [26.79, 29.68, 35.65],
            [43.95, 47.21, 54.46],
            [64.84, 68.52, 76.07],
        ]
    ),
}


def trace_critical_values(n: int, trend, level: str = "5%") -> np.ndarray:
    """Critical values for the hypotheses ``r = 0 .. n-1``."""
    trend = TrendSpec.parse(trend)
    if trend not in _TRACE_CV:
        raise InvalidSpec("Johansen test supports trend 'none' or 'constant' only")
    if n > _TRACE_CV[trend].shape[0]:
        raise InvalidSpec(f"trace critical values tabulated up to 5 variables, got {n}")
    col = {"10%": 0, "5%": 1, "1%": 2}[level]
    return _TRACE_CV[trend][n - 1 :: -1, col][:n].copy()


@dataclass(frozen=True, eq=False)
class JohansenResult:
    eigenvalues: np.ndarray
    trace_statistics: np.ndarray
    critical_values_5pct: np.ndarray
    selected_rank: int
    lag_order: int
    trend: TrendSpec
    eigenvectors: np.ndarray
    n_obs: int
    log_det_s00: float
    start_year: int

    def loglik(self, rank: int) -> float:
        n, T = self.eigenvalues.size, self.n_obs
        return -0.5 * T * (
            n * (1.0 + np.log(2 * np.pi))
            + self.log_det_s00
            + float(np.sum(np.log1p(-self.eigenvalues[:rank])))
        )

    def n_params(self, rank: int) -> int:
        n = self.eigenvalues.size
        det = n if self.trend is TrendSpec.CONSTANT else 0
        return n * n * (self.lag_order - 1) + det + rank * (2 * n - rank)

    def information_criteria(self, rank: int) -> dict[str, float]:
        """AIC, HQIC and SBIC of the VECM with cointegrating rank ``rank``."""
        T = self.n_obs
        base = -2.0 * self.loglik(rank) / T
        k = self.n_params(rank)
        return {
            "aic": base + 2.0 * k / T,
            "hqic": base + 2.0 * np.log(np.log(T)) * k / T,
            "sbic": base + np.log(T) * k / T,
        }


def _stack(data: Sequence[AnnualSeries]) -> np.ndarray:
    data = list(data)
    if len(data) < 2:
        raise DegenerateInput("need at least two series")
    require_aligned(*data)
    return np.column_stack([s.values for s in data])


def _partial_out(Z: np.ndarray, W: np.ndarray | None) -> np.ndarray:
    if W is None or W.shape[1] == 0:
        return Z
    coef, *_ = np.linalg.lstsq(W, Z, rcond=None)
    return Z - W @ coef


def _vecm_matrices(Y: np.ndarray, lag_order: int, trend: TrendSpec):
    """Differences, lagged levels and short-run regressors over the usable sample."""
    T = Y.shape[0]
    dY = np.diff(Y, axis=0)
    p = lag_order
    z0 = dY[p - 1 :]
    z1 = Y[p - 1 : T - 1]
    blocks = [dY[p - 1 - i : T - 1 - i] for i in range(1, p)]
    if trend is TrendSpec.CONSTANT:
        blocks.append(np.ones((z0.shape[0], 1)))
    w = np.column_stack(blocks) if blocks else None
    return z0, z1, w


def _check_sizes(Y: np.ndarray, lag_order: int) -> None:
    T, n = Y.shape
    if lag_order < 1:
        raise DegenerateInput(f"VAR lag order must be at least 1, got {lag_order}")
    if T < n * (lag_order + 2) + 10:
        raise DegenerateInput(
            f"{T} observations too few for {n} series at lag {lag_order} "
            f"(need {n * (lag_order + 2) + 10})"
        )


def _checked_moment(S: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(S)):
        raise SingularSystem(f"{name} is not finite")
    d = np.sqrt(np.diag(S))
    if np.any(d <= 0):
        raise SingularSystem(f"{name} has a zero-variance component")
    corr = S / np.outer(d, d)
    if np.linalg.cond(corr) > 1e12:
        raise SingularSystem(f"{name} is numerically singular")


def johansen_trace(
    data: Sequence[AnnualSeries], lag_order: int = 2, trend=TrendSpec.CONSTANT
) -> JohansenResult:
    """Johansen trace test for the cointegrating rank.

    ``lag_order`` is the lag of the levels VAR; the error-correction form uses
    ``lag_order - 1`` lagged differences.  With ``trend="constant"`` the
    constant enters unrestricted.  The selected rank is the first hypothesis
    (from ``r = 0`` upward) whose trace statistic falls below its 5% value.
    """
    trend = TrendSpec.parse(trend)
    Y = _stack(data)
    _check_sizes(Y, lag_order)
    n = Y.shape[1]
    cvs = trace_critical_values(n, trend)
    z0, z1, w = _vecm_matrices(Y, lag_order, trend)
    T = z0.shape[0]
    r0 = _partial_out(z0, w)
    r1 = _partial_out(z1, w)
    s00 = r0.T @ r0 / T
    s11 = r1.T @ r1 / T
    s01 = r0.T @ r1 / T
    _checked_moment(s00, "S00")
    _checked_moment(s11, "S11")
    a = s01.T @ np.linalg.solve(s00, s01)
    a = 0.5 * (a + a.T)
    try:
        lam, vecs = linalg.eigh(a, s11)
    except linalg.LinAlgError as exc:
        raise SingularSystem(f"generalized eigenproblem failed: {exc}") from exc
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, 1.0 - 1e-15)
    vecs = vecs[:, order]
    logs = np.log1p(-lam)
    trace = np.array([-T * logs[r:].sum() for r in range(n)])
    rank = next((r for r in range(n) if trace[r] < cvs[r]), n)
    _, logdet = np.linalg.slogdet(s00)
    start = data[0].start_year + lag_order
    return JohansenResult(lam, trace, cvs, rank, lag_order, trend, vecs, T, float(logdet), start)


@dataclass(frozen=True, eq=False)
class VecmFit:
    """Error-correction model ``dy_t = alpha beta' y_{t-1} + sum G_i dy_{t-i} + mu + e_t``.

    ``beta`` (n x rank) is normalised so that its leading ``rank x rank``
    block is the identity; for a single relation its first component is +1.
    """

    beta: np.ndarray
    beta_se: np.ndarray
    alpha: np.ndarray
    alpha_se: np.ndarray
    short_run: list[np.ndarray]
    short_run_se: list[np.ndarray]
    intercept: np.ndarray | None
    intercept_se: np.ndarray | None
    per_equation_r2: np.ndarray
    per_equation_rmse: np.ndarray
    residuals: np.ndarray
    rank: int
    lag_order: int
    trend: TrendSpec
    n_obs: int
    start_year: int
    johansen: JohansenResult

    def error_correction_term(self, data: Sequence[AnnualSeries]) -> np.ndarray:
        """``beta' y_t`` for every year of ``data``, one column per relation."""
        return _stack(data) @ self.beta


def fit_vecm(
    data: Sequence[AnnualSeries],
    rank: int = 1,
    lag_order: int = 2,
    trend=TrendSpec.CONSTANT,
) -> VecmFit:
    """Estimate a VECM with ``rank`` cointegrating relations.

    ``beta`` comes from the leading Johansen eigenvectors; given ``beta``,
    the loading, short-run and constant coefficients are per-equation least
    squares with ``n - k`` standard errors.  Standard errors for the free
    rows of ``beta`` use the usual asymptotic covariance
    ``(R1' R1)^-1 (kron) (alpha' Sigma^-1 alpha)^-1`` over the partialled
    lagged levels.
    """
    trend = TrendSpec.parse(trend)
    jo = johansen_trace(data, lag_order, trend)
    n = jo.eigenvalues.size
    if not 1 <= rank <= n - 1:
        raise DegenerateInput(f"rank must lie in [1, {n - 1}], got {rank}")
    Y = _stack(data)
    z0, z1, w = _vecm_matrices(Y, lag_order, trend)
    T = z0.shape[0]

    beta = jo.eigenvectors[:, :rank]
    beta = beta @ np.linalg.inv(beta[:rank, :rank])
    ect = z1 @ beta
    lagged = w[:, : n * (lag_order - 1)] if w is not None else np.empty((T, 0))
    X = np.column_stack([ect, lagged])
    has_const = trend is TrendSpec.CONSTANT

    fits = [fit_ols(z0[:, i], X, intercept=has_const) for i in range(n)]
    coefs = np.array([f.coefficients for f in fits])
    ses = np.array([f.standard_errors for f in fits])
    alpha, alpha_se = coefs[:, :rank], ses[:, :rank]
    short_run, short_run_se = [], []
    for i in range(lag_order - 1):
        cols = slice(rank + i * n, rank + (i + 1) * n)
        short_run.append(coefs[:, cols])
        short_run_se.append(ses[:, cols])
    resid = np.column_stack([f.residuals for f in fits])

    sigma = resid.T @ resid / T
    r12 = _partial_out(z1, w)[:, rank:]
    a_info = alpha.T @ np.linalg.solve(sigma, alpha)
    var_lower = np.outer(
        np.diag(np.linalg.inv(r12.T @ r12)), np.diag(np.linalg.inv(a_info))
    )
    beta_se = np.vstack([np.zeros((rank, rank)), np.sqrt(var_lower)])

    return VecmFit(
        beta=beta,
        beta_se=beta_se,
        alpha=alpha,
        alpha_se=alpha_se,
        short_run=short_run,
        short_run_se=short_run_se,
        intercept=coefs[:, -1] if has_const else None,
        intercept_se=ses[:, -1] if has_const else None,
        per_equation_r2=np.array([f.r_squared for f in fits]),
        per_equation_rmse=np.array([f.rmse for f in fits]),
        residuals=resid,
        rank=rank,
        lag_order=lag_order,
        trend=trend,
        n_obs=T,
        start_year=jo.start_year,
        johansen=jo,
    )
