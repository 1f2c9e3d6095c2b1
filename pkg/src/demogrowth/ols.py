"""Ordinary least squares with classical inference and residual normality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from demogrowth.errors import DegenerateInput, SingularDesign

__all__ = ["OlsFit", "NormalityResult", "fit_ols", "jarque_bera", "chi2_sf"]


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Least-squares estimates.

    When the fit has an intercept it is the *last* coefficient.  Standard
    errors use the residual variance with an ``n - k`` denominator, and
    ``rmse`` is ``sqrt(RSS / (n - k))``.
    """

    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_statistics: np.ndarray
    r_squared: float
    rmse: float
    residuals: np.ndarray
    n_obs: int
    n_params: int
    fitted: np.ndarray
    covariance: np.ndarray
    intercept: bool = True

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    @property
    def slope(self) -> float:
        return float(self.coefficients[0])


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    p_value: float
    skewness: float
    kurtosis: float


def chi2_sf(x: float, df: float) -> float:
    """Upper tail of the chi-squared distribution via the regularized gamma."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def _design(X, n: int, intercept: bool) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.size == 0:
        X = np.empty((n, 0))
    if X.shape[0] != n:
        raise DegenerateInput(f"design has {X.shape[0]} rows but y has {n} observations")
    if intercept:
        X = np.column_stack([X, np.ones(n)])
    return X


def fit_ols(y, X, intercept: bool = True) -> OlsFit:
    """Regress ``y`` on the columns of ``X`` (plus a trailing constant if requested).

    Parameters
    ----------
    y : array_like, shape (n,)
    X : array_like, shape (n, k) or (n,)
        Regressors, without the constant.
    intercept : bool
        Append a column of ones and measure R² about the mean of ``y``.

    Raises
    ------
    DegenerateInput
        If ``n`` does not exceed the number of parameters.
    SingularDesign
        If the design lacks full column rank.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    Z = _design(X, n, intercept)
    k = Z.shape[1]
    if k == 0:
        raise DegenerateInput("design has no columns")
    if n <= k:
        raise DegenerateInput(f"{n} observations cannot identify {k} parameters")
    if not np.all(np.isfinite(Z)) or not np.all(np.isfinite(y)):
        raise DegenerateInput("non-finite values in regression data")

    # Column scaling keeps the rank decision independent of units.
    scale = np.sqrt(np.sum(Z**2, axis=0))
    if np.any(scale == 0):
        raise SingularDesign("design contains an all-zero column")
    Zs = Z / scale
    q, r = np.linalg.qr(Zs)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        raise SingularDesign(f"design matrix ({n}x{k}) is rank deficient")
    beta_s = np.linalg.solve(r, q.T @ y)
    beta = beta_s / scale
    fitted = Z @ beta
    resid = y - fitted
    dof = n - k
    rss = float(resid @ resid)
    sigma2 = rss / dof
    rinv = np.linalg.solve(r, np.eye(k))
    cov = sigma2 * (rinv @ rinv.T) / np.outer(scale, scale)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = np.where(se > 0, beta / se, np.nan)
    tss = float(np.sum((y - y.mean()) ** 2)) if intercept else float(y @ y)
    if tss > 0:
        r2 = 1.0 - rss / tss
    else:
        r2 = 1.0 if rss == 0 else 0.0
    if intercept:
        r2 = min(max(r2, 0.0), 1.0)
    fit = OlsFit(
        coefficients=beta,
        standard_errors=se,
        t_statistics=tstat,
        r_squared=float(r2),
        rmse=float(np.sqrt(sigma2)),
        residuals=resid,
        n_obs=n,
        n_params=k,
        fitted=fitted,
        covariance=cov,
        intercept=intercept,
    )
    return fit


def _moments(x: np.ndarray) -> tuple[float, float]:
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 <= 0 or m2 <= 1e-28 * max(1.0, float(np.mean(x**2))):
        raise DegenerateInput("zero-variance input")
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2
    return float(skew), float(kurt)


def jarque_bera(residuals) -> NormalityResult:
    """Jarque-Bera normality test; kurtosis is reported raw (3 under normality)."""
    x = np.asarray(residuals, dtype=float).ravel()
    if x.size < 8:
        raise DegenerateInput(f"Jarque-Bera needs at least 8 observations, got {x.size}")
    skew, kurt = _moments(x)
    stat = x.size / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return NormalityResult(float(stat), chi2_sf(stat, 2), skew, kurt)
