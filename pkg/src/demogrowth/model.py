"""Two-component growth model linking GDP per capita to the defining-age cohort.

Real GDP per capita ``G`` grows by a constant increment ``A`` per year, so the
trend growth rate is ``A / G``.  Deviations of the observed growth rate from
that trend are carried entirely by the relative change of the defining-age
population ``N9``::

    g_pc(t) = 0.5 * (N9(t+1) - N9(t)) / N9(t) + A / G(t)

Inverting the discrete relation gives a one-step recursion for ``N9``, which
is what :func:`predict_n9` iterates.  Growth rates are dated at the base year
of the forward ratio, so ``g_pc(t)`` and ``G(t)`` drive the step from ``t`` to
``t + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from demogrowth.errors import (
    AlignmentError,
    CalibrationError,
    DegenerateInput,
    DomainError,
    ModelBreakdown,
)
from demogrowth.series import AnnualSeries, require_aligned

__all__ = [
    "ModelParams",
    "FitReport",
    "trend_growth",
    "implied_gpc",
    "predict_n9",
    "calibrate",
    "forward_gdp",
]

# Weight of the cohort change rate in the growth equation; fixed by the model.
COHORT_WEIGHT = 0.5


@dataclass(frozen=True)
class ModelParams:
    A: float
    n9_initial: float
    initial_year: int

    def __post_init__(self):
        if not self.A > 0:
            raise DomainError(f"A must be positive, got {self.A}")
        if not self.n9_initial > 0:
            raise DomainError(f"n9_initial must be positive, got {self.n9_initial}")
        object.__setattr__(self, "initial_year", int(self.initial_year))


@dataclass(frozen=True)
class FitReport:
    """Calibrated parameters and the measured-minus-predicted residual summary."""

    params: ModelParams
    mean_difference: float
    sd_difference: float
    rms_difference: float
    fit_start: int
    fit_end: int
    n_obs: int


def _positive(s: AnnualSeries, name: str) -> None:
    if np.any(s.values <= 0):
        year = s.start_year + int(np.flatnonzero(s.values <= 0)[0])
        raise DomainError(f"{name} must be positive; offending year {year}")


def trend_growth(G: AnnualSeries, A: float) -> AnnualSeries:
    """Trend growth rate ``A / G`` for every year of ``G``."""
    if not A > 0:
        raise DomainError(f"A must be positive, got {A}")
    _positive(G, "G")
    return AnnualSeries(G.start_year, A / G.values, "1/year")


def implied_gpc(n9: AnnualSeries, G: AnnualSeries, A: float) -> AnnualSeries:
    """GDP per capita growth implied by a cohort path and the trend."""
    require_aligned(n9, G)
    if len(n9) < 2:
        raise DegenerateInput("need at least two years of N9")
    _positive(n9, "N9")
    trend = trend_growth(G, A).values
    v = n9.values
    g = COHORT_WEIGHT * np.diff(v) / v[:-1] + trend[:-1]
    return AnnualSeries(n9.start_year, g, "1/year")


def _step_factors(g_pc: AnnualSeries, G: AnnualSeries, A: float, initial_year: int):
    """Multiplicative factors ``1 + 2 (g_pc - A/G)`` from ``initial_year`` on."""
    if initial_year < g_pc.start_year or initial_year > g_pc.end_year:
        raise AlignmentError(
            f"initial year {initial_year} outside growth-rate range "
            f"{g_pc.start_year}-{g_pc.end_year}"
        )
    if G.start_year > initial_year or G.end_year < g_pc.end_year:
        raise AlignmentError(
            f"G ({G.start_year}-{G.end_year}) does not cover "
            f"{initial_year}-{g_pc.end_year}"
        )
    g = g_pc.window(initial_year).values
    gv = G.window(initial_year, g_pc.end_year).values
    _positive(G.window(initial_year, g_pc.end_year), "G")
    return 1.0 + (1.0 / COHORT_WEIGHT) * (g - A / gv)


def predict_n9(g_pc: AnnualSeries, G: AnnualSeries, params: ModelParams) -> AnnualSeries:
    """Iterate the cohort recursion from ``params.n9_initial`` at the initial year.

    The result runs from ``params.initial_year`` to one year past the last
    growth-rate reading.

    Raises
    ------
    ModelBreakdown
        If any step factor is non-positive, i.e. the population would vanish.
    """
    factors = _step_factors(g_pc, G, params.A, params.initial_year)
    bad = np.flatnonzero(factors <= 0)
    if bad.size:
        year = params.initial_year + int(bad[0])
        raise ModelBreakdown(
            f"step factor {factors[bad[0]]:.4g} <= 0 at {year} for A={params.A}"
        )
    path = params.n9_initial * np.concatenate(([1.0], np.cumprod(factors)))
    return AnnualSeries(params.initial_year, path, "persons")


def forward_gdp(n9: AnnualSeries, A: float, g0: float) -> AnnualSeries:
    """GDP per capita path consistent with ``n9`` under the model, starting at ``g0``.

    Used to build synthetic fixtures: each year adds ``A`` plus the cohort
    contribution ``0.5 * G * dN9 / N9``.
    """
    _positive(n9, "N9")
    v = n9.values
    out = np.empty_like(v)
    out[0] = g0
    rel = COHORT_WEIGHT * np.diff(v) / v[:-1]
    for t in range(len(v) - 1):
        out[t + 1] = out[t] * (1.0 + rel[t]) + A
    return AnnualSeries(n9.start_year, out, "dollars per person")


def calibrate(
    g_pc: AnnualSeries,
    G: AnnualSeries,
    n9_measured: AnnualSeries,
    initial_year: int,
    *,
    a_bounds: tuple[float, float] = (1.0, 10000.0),
    fit_start: int | None = None,
    fit_end: int | None = None,
    grid_size: int = 400,
) -> FitReport:
    """Fit ``(A, N9_0)`` by minimising the RMS residual under a zero-mean constraint.

    The predicted path is linear in ``N9_0``, so for every trial ``A`` the
    zero-mean condition fixes ``N9_0`` in closed form; only ``A`` is searched,
    first on a log grid and then by bounded Brent refinement around the best
    grid point.  Residuals are compared over ``[fit_start, fit_end]``
    (default: every year where prediction and measurement overlap).
    """
    lo, hi = map(float, a_bounds)
    if not 0 < lo < hi:
        raise CalibrationError(f"invalid bounds for A: {a_bounds}")
    _positive(n9_measured, "N9")
    factors_at = lambda a: _step_factors(g_pc, G, a, initial_year)  # noqa: E731

    pred_start, pred_end = initial_year, g_pc.end_year + 1
    f0 = fit_start if fit_start is not None else max(pred_start, n9_measured.start_year)
    f1 = fit_end if fit_end is not None else min(pred_end, n9_measured.end_year)
    f0, f1 = max(f0, pred_start, n9_measured.start_year), min(f1, pred_end, n9_measured.end_year)
    if f1 - f0 + 1 < 5:
        raise DegenerateInput(f"calibration window {f0}-{f1} shorter than 5 years")
    measured = n9_measured.window(f0, f1).values
    i0 = f0 - initial_year

    # A may not exceed min G(t) (g(t) + 0.5) or some step factor turns non-positive.
    factors_at(lo)
    gv = G.window(initial_year, g_pc.end_year).values
    a_max = float(np.min(gv * (g_pc.window(initial_year).values + COHORT_WEIGHT)))
    trace: list[tuple[float, float]] = []
    upper = min(hi, a_max * (1.0 - 1e-9))
    if upper <= lo:
        raise CalibrationError(
            f"no admissible A in [{lo}, {hi}]: step factors vanish above A={a_max:.6g}",
            trace,
        )

    def profile(a: float):
        path = np.concatenate(([1.0], np.cumprod(factors_at(a))))
        unit = path[i0 : i0 + measured.size]
        n0 = measured.mean() / unit.mean()
        return n0, measured - n0 * unit

    def objective(a: float) -> float:
        _, resid = profile(a)
        val = float(np.mean(resid**2))
        trace.append((float(a), val))
        return val

    grid = np.geomspace(lo, upper, grid_size)
    values = np.array([objective(a) for a in grid])
    if not np.all(np.isfinite(values)):
        raise CalibrationError("objective not finite on the search grid", trace)
    k = int(np.argmin(values))
    left, right = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(
        objective,
        bounds=(left, right),
        method="bounded",
        options={"xatol": 1e-10 * max(1.0, right)},
    )
    a_best = float(res.x) if res.fun <= values[k] else float(grid[k])
    n0, resid = profile(a_best)
    if not (np.isfinite(n0) and n0 > 0):
        raise CalibrationError(f"zero-mean solve produced N9_0={n0}", trace)
    mean = float(resid.mean())
    if abs(mean) > 0.5:
        raise CalibrationError(f"mean residual {mean:.3f} not within 0.5 persons", trace)
    return FitReport(
        params=ModelParams(a_best, float(n0), initial_year),
        mean_difference=mean,
        sd_difference=float(resid.std(ddof=1)),
        rms_difference=float(np.sqrt(np.mean(resid**2))),
        fit_start=f0,
        fit_end=f1,
        n_obs=int(measured.size),
    )
