"""End-to-end pipeline: calibrate, predict, then the full test battery.

Each cohort vintage runs through the same ordered stages.  A stage that
raises records the error (stage name, exception type, message) and stops
that vintage; tables from earlier stages stay in the report.  Nothing in the
output depends on wall-clock time or the location of the config file, so
identical inputs give byte-identical JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from demogrowth import __version__
from demogrowth.cointegration import engle_granger, fit_vecm, johansen_trace
from demogrowth.errors import ConfigError, DegenerateInput, DemogrowthError
from demogrowth.model import calibrate, predict_n9, trend_growth
from demogrowth.ols import fit_ols
from demogrowth.pipeline.config import DatasetConfig, RunConfig
from demogrowth.pipeline.ingest import ingest_csv, sha256_file
from demogrowth.pipeline.report import Report, Table
from demogrowth.series import AnnualSeries, align, diff, growth_rate, moving_average
from demogrowth.unitroot import (
    TrendSpec,
    UnitRootResult,
    adf_test,
    critical_value,
    dfgls_test,
    simulate_critical_value,
)
from demogrowth.var import diagnose, fit_var, select_lag

STAGES = (
    "growth",
    "calibrate",
    "predict",
    "levels",
    "differences",
    "residual_tests",
    "lag_selection",
    "johansen",
    "var",
    "vecm",
    "regressions",
)
UNIT_ROOT_STAR = "1%"
COEF_STAR = "5%"


@dataclass
class Inputs:
    gdp_per_capita: AnnualSeries
    vintages: dict[str, AnnualSeries]
    hashes: dict[str, dict]


def _span(s: AnnualSeries) -> str:
    return f"{s.start_year}-{s.end_year}"


def load_inputs(dataset: DatasetConfig) -> Inputs:
    """Read every configured CSV and restrict all series to a common year range."""
    raw: dict[str, AnnualSeries] = {}
    hashes: dict[str, dict] = {}
    units = {"n9_measured": "persons", "n9_second": "persons", "population_15plus": "persons"}
    for name, src in dataset.sources().items():
        path = dataset.resolve(src.path)
        if not path.is_file():
            raise ConfigError(f"{name}: input file {path} does not exist")
        raw[name] = ingest_csv(path, src.column, unit=units.get(name, "dollars"))
        hashes[name] = {"file": src.path, "column": src.column, "sha256": sha256_file(path)}

    if "gdp_per_capita" in raw:
        gdp = raw["gdp_per_capita"]
    else:
        tot, pop = align(raw["gdp_total"], raw["population_15plus"])
        if np.any(pop.values <= 0):
            raise ConfigError("population_15plus must be positive")
        gdp = AnnualSeries(tot.start_year, tot.values / pop.values, "dollars per person")
    gdp = AnnualSeries(gdp.start_year, gdp.values, "dollars per person")

    cohorts = {dataset.vintage_label: raw["n9_measured"]}
    if "n9_second" in raw:
        if dataset.second_label == dataset.vintage_label:
            raise ConfigError("vintage labels must differ")
        cohorts[dataset.second_label] = raw["n9_second"]

    lo = max([gdp.start_year] + [s.start_year for s in cohorts.values()])
    hi = min([gdp.end_year] + [s.end_year for s in cohorts.values()])
    if dataset.start_year is not None:
        lo = max(lo, dataset.start_year)
    if dataset.end_year is not None:
        hi = min(hi, dataset.end_year)
    if hi - lo + 1 < 2:
        raise ConfigError(
            f"inputs and year range leave no common years (intersection {lo}-{hi})"
        )
    return Inputs(
        gdp.window(lo, hi),
        {k: v.window(lo, hi) for k, v in cohorts.items()},
        hashes,
    )


# --------------------------------------------------------------------------- tables


def _unit_root_rows(columns: dict[str, list[UnitRootResult]], start_years: dict[str, int]):
    """Rows ``test, lag, trend, sample, n_obs, <series...>, cv_1%, cv_5%, cv_10%``.

    All series in one table share a length, so critical values coincide.
    """
    names = list(columns)
    first = columns[names[0]]
    rows, stars = [], []
    for i, ref in enumerate(first):
        start = start_years[names[0]] + ref.lag + 1
        end = start + ref.n_obs - 1
        row = [ref.test.upper().replace("DFGLS", "DF-GLS"), ref.lag, ref.trend.value, f"{start}-{end}", ref.n_obs]
        for name in names:
            res = columns[name][i]
            row.append(res.statistic)
            if res.rejects(UNIT_ROOT_STAR):
                stars.append([i, name])
        row += [ref.critical_values[lv] for lv in ("1%", "5%", "10%")]
        rows.append(row)
    cols = ["test", "lag", "trend", "sample", "n_obs", *names, "cv_1%", "cv_5%", "cv_10%"]
    return cols, rows, stars


def _battery(s: AnnualSeries, adf_lags, dfgls_lags, adf_trend, dfgls_trend) -> list[UnitRootResult]:
    return [adf_test(s, p, adf_trend) for p in adf_lags] + [dfgls_test(s, p, dfgls_trend) for p in dfgls_lags]


def _significant(coef: float, se: float, dof: int) -> bool:
    if not (se > 0 and dof > 0):
        return False
    return 2.0 * stats.t.sf(abs(coef / se), dof) < float(COEF_STAR.rstrip("%")) / 100.0


@dataclass
class _Vintage:
    label: str
    run: RunConfig
    G: AnnualSeries
    M: AnnualSeries
    tables: list[Table] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    g: AnnualSeries | None = None
    fit: object = None
    P: AnnualSeries | None = None
    Ma: AnnualSeries | None = None
    Pa: AnnualSeries | None = None

    def add(self, table: Table) -> Table:
        table.vintage = self.label
        self.tables.append(table)
        return table

    # -- stages ----------------------------------------------------------------

    def growth(self):
        self.g = growth_rate(self.G)

    def calibrate(self):
        r = self.run
        initial = r.initial_year if r.initial_year is not None else self.G.start_year
        self.fit = fit = calibrate(
            self.g, self.G, self.M, initial, a_bounds=r.a_bounds, fit_start=r.fit_start
        )
        p = fit.params
        self.add(
            Table(
                "calibration",
                "Model calibration",
                ["quantity", "value"],
                [
                    ["A", p.A],
                    ["N9_initial", p.n9_initial],
                    ["initial_year", p.initial_year],
                    ["mean_difference", fit.mean_difference],
                    ["sd_difference", fit.sd_difference],
                    ["rms_difference", fit.rms_difference],
                    ["n_obs", fit.n_obs],
                ],
                meta={"sample": f"{fit.fit_start}-{fit.fit_end}", "a_bounds": list(r.a_bounds)},
            )
        )
        self.summary.update(A=p.A, n9_initial=p.n9_initial, rms_difference=fit.rms_difference)

    def predict(self):
        self.P = predict_n9(self.g, self.G, self.fit.params)
        a0 = self.run.analysis_start
        lo = max(self.P.start_year, self.M.start_year, a0 if a0 is not None else -10**9)
        hi = min(self.P.end_year, self.M.end_year)
        if hi - lo + 1 < 15:
            raise DegenerateInput(f"analysis window {lo}-{hi} shorter than 15 years")
        self.Ma, self.Pa = self.M.window(lo, hi), self.P.window(lo, hi)
        self.summary["analysis_sample"] = _span(self.Ma)
        self.add(self._series_table())

    def _series_table(self) -> Table:
        A = self.fit.params.A
        trend = trend_growth(self.G, A)
        lo = min(self.G.start_year, self.M.start_year)
        hi = max(self.G.end_year, self.M.end_year)

        def get(s, y):
            return float(s.values[y - s.start_year]) if s.start_year <= y <= s.end_year else None

        rows = []
        for y in range(lo, hi + 1):
            m, p = get(self.M, y), get(self.P, y)
            rows.append([
                y, get(self.G, y), get(self.g, y), get(trend, y), m, p,
                None if m is None or p is None else m - p,
            ])
        return Table(
            "series",
            "Plot-ready series",
            ["year", "gdp_per_capita", "growth_rate", "trend_growth", "n9_measured", "n9_predicted", "difference"],
            rows,
            meta={"sample": f"{lo}-{hi}", "growth_dating": "forward ratio dated at the base year"},
        )

    def levels(self):
        r = self.run
        res = {
            name: _battery(s, range(r.adf_max_lag + 1), range(1, r.dfgls_max_lag + 1), "constant", "constant")
            for name, s in (("predicted", self.Pa), ("measured", self.Ma))
        }
        cols, rows, stars = _unit_root_rows(res, {"predicted": self.Pa.start_year, "measured": self.Ma.start_year})
        self.add(Table(
            "table1_levels", "Unit-root tests on levels", cols, rows,
            meta={"sample": _span(self.Ma), "star_level": UNIT_ROOT_STAR}, stars=stars,
        ))

    def differences(self):
        r = self.run
        lags = range(r.diff_max_lag + 1)
        series = {}
        for name, full, a in (("predicted", self.P, self.Pa), ("measured", self.M, self.Ma)):
            series[name] = diff(full.window(max(a.start_year - 1, full.start_year), a.end_year))
        res = {n: _battery(s, lags, range(1, r.diff_max_lag + 1), "constant", "constant") for n, s in series.items()}
        cols, rows, stars = _unit_root_rows(res, {n: s.start_year for n, s in series.items()})
        self.add(Table(
            "table2_differences", "Unit-root tests on first differences", cols, rows,
            meta={"sample": _span(series["measured"]), "star_level": UNIT_ROOT_STAR}, stars=stars,
        ))

    def residual_tests(self):
        r = self.run
        d = AnnualSeries(self.Ma.start_year, self.Ma.values - self.Pa.values, "persons")
        res = {"difference": _battery(d, range(r.diff_max_lag + 1), range(1, r.diff_max_lag + 1), "none", "constant")}
        cols, rows, stars = _unit_root_rows(res, {"difference": d.start_year})
        self.add(Table(
            "table3_difference_series", "Unit-root tests on measured minus predicted", cols, rows,
            meta={"sample": _span(d), "star_level": UNIT_ROOT_STAR,
                  "dfgls_detrending": "constant (GLS demeaning)"},
            stars=stars,
        ))
        eg = engle_granger(self.Ma, self.Pa, r.diff_max_lag)
        cols, rows, stars = _unit_root_rows({"residual": eg.residual_tests}, {"residual": self.Ma.start_year})
        self.add(Table(
            "table4_eg_residuals", "Engle-Granger residual unit-root tests", cols, rows,
            meta={
                "sample": _span(self.Ma),
                "star_level": UNIT_ROOT_STAR,
                "step1_slope": eg.step1.slope,
                "step1_intercept": float(eg.step1.coefficients[-1]),
                "cointegrated_at": eg.cointegrated_at,
            },
            stars=stars,
        ))
        self.summary["eg_cointegrated_at"] = eg.cointegrated_at

    def lag_selection(self):
        sel = select_lag([self.Ma, self.Pa], self.run.var_max_lag)
        crit = {"lr": sel.lr, "fpe": sel.fpe, "aic": sel.aic, "hqic": sel.hqic, "sbic": sel.sbic}
        rows = [
            [p, sel.log_likelihood[i], sel.lr[i], sel.lr_pvalue[i], sel.fpe[i], sel.aic[i], sel.hqic[i], sel.sbic[i]]
            for i, p in enumerate(sel.lags)
        ]
        stars = [[sel.lags.index(k), name] for name, k in sel.chosen.items() if name in crit]
        end = sel.start_year + sel.n_obs - 1
        self.add(Table(
            "table5_lag_selection", "VAR lag-order selection",
            ["lag", "loglik", "lr", "lr_pvalue", "fpe", "aic", "hqic", "sbic"], rows,
            meta={"sample": f"{sel.start_year}-{end}", "n_obs": sel.n_obs, "star_marks": "lag chosen by the criterion",
                  "chosen": dict(sel.chosen)},
            notes=[f"Selected lag: {sel.consensus}"], stars=stars,
        ))
        self.summary["selected_lag"] = sel.consensus

    def johansen(self):
        r = self.run
        jo = johansen_trace([self.Ma, self.Pa], r.johansen_lag, r.johansen_trend)
        n = jo.eigenvalues.size
        rows = []
        ics = [jo.information_criteria(k) for k in range(n + 1)]
        for k in range(n + 1):
            rows.append([
                k,
                jo.n_params(k),
                jo.loglik(k),
                float(jo.eigenvalues[k - 1]) if k >= 1 else None,
                ics[k]["sbic"],
                ics[k]["hqic"],
                ics[k]["aic"],
                float(jo.trace_statistics[k]) if k < n else None,
                float(jo.critical_values_5pct[k]) if k < n else None,
            ])
        stars = []
        if jo.selected_rank < n:
            stars.append([jo.selected_rank, "trace"])
        for ic in ("sbic", "hqic", "aic"):
            stars.append([int(np.argmin([c[ic] for c in ics])), ic])
        end = jo.start_year + jo.n_obs - 1
        self.add(Table(
            "table6_johansen", "Johansen trace test",
            ["rank", "n_params", "loglik", "eigenvalue", "sbic", "hqic", "aic", "trace", "cv_5%"], rows,
            meta={"sample": f"{jo.start_year}-{end}", "lag": r.johansen_lag, "trend": jo.trend.value,
                  "star_marks": "selected rank (trace) or criterion minimum"},
            notes=[f"Rank: {jo.selected_rank}"], stars=stars,
        ))
        self.summary["johansen_rank"] = jo.selected_rank

        var = fit_var([self.Ma, self.Pa], r.johansen_lag)
        dg = diagnose(var, r.lm_lags)
        rows = [[f"LM autocorrelation lag {k}", "chi2", stat, var.n_vars**2, p] for k, (stat, p) in dg.lm_by_lag.items()]
        for name, jb in zip(("measured", "predicted"), dg.jarque_bera):
            rows.append([f"Jarque-Bera {name}", "chi2", jb.statistic, 2, jb.p_value])
        jj = dg.jarque_bera_joint
        rows.append(["Jarque-Bera joint", "chi2", jj.statistic, jj.df, jj.p_value])
        rows.append(["max companion modulus", "modulus", float(dg.companion_moduli[0]), None, None])
        self.add(Table(
            "var_diagnostics", "VAR residual diagnostics",
            ["diagnostic", "kind", "statistic", "df", "p_value"], rows,
            meta={"sample": f"{var.start_year}-{var.start_year + var.n_obs - 1}", "lag": r.johansen_lag},
            notes=[f"Stable: {'yes' if dg.stable else 'no'}"],
        ))

    def var(self):
        p = self.run.var_lag
        cols = ["model", "sample", "n_obs", "rmse", "r2"]
        for j in range(1, p + 1):
            cols += [f"measured_L{j}", f"measured_L{j}_se"]
        for j in range(0, p + 1):
            cols += [f"predicted_L{j}", f"predicted_L{j}_se"]
        rows, stars = [], []
        exo = fit_var([self.Ma], p, exog=self.Pa, exog_lags=(0,))
        endo = fit_var([self.Ma, self.Pa], p)
        for i, (label, f) in enumerate((("exogenous", exo), ("endogenous", endo))):
            dof = f.n_obs - f.design.shape[1]
            row = [label, f"{f.start_year}-{f.start_year + f.n_obs - 1}", f.n_obs,
                   float(f.per_equation_rmse[0]), float(f.per_equation_r2[0])]
            cells = {}
            for j in range(p):
                cells[f"measured_L{j + 1}"] = (f.coefs[j][0, 0], f.coefs_se[j][0, 0])
                if f.n_vars > 1:
                    cells[f"predicted_L{j + 1}"] = (f.coefs[j][0, 1], f.coefs_se[j][0, 1])
            if f.exog_coefs is not None:
                cells["predicted_L0"] = (f.exog_coefs[0, 0], f.exog_se[0, 0])
            for c in cols[5::2]:
                coef, se = cells.get(c, (None, None))
                row += [coef, se]
                if coef is not None and _significant(coef, se, dof):
                    stars.append([i, c])
            rows.append(row)
        self.add(Table(
            "table7_var", "VAR models for the measured series", cols, rows,
            meta={"lag": p, "equation": "measured", "star_level": COEF_STAR, "sample": rows[0][1]},
            stars=stars,
        ))
        self.summary["var_exogenous_r2"] = float(exo.per_equation_r2[0])
        self.summary["var_exogenous_rmse"] = float(exo.per_equation_rmse[0])

    def vecm(self):
        r = self.run
        v = fit_vecm([self.Ma, self.Pa], r.vecm_rank, r.var_lag, r.johansen_trend)
        names = ("measured", "predicted")
        k = v.lag_order - 1
        cols = ["equation", "rmse", "r2", "beta", "beta_se", "alpha", "alpha_se"]
        for j in range(1, k + 1):
            for nm in names:
                cols += [f"LD{j}_{nm}", f"LD{j}_{nm}_se"]
        dof = v.n_obs - (v.rank + len(names) * k + (1 if v.intercept is not None else 0))
        rows, stars = [], []
        for i, eq in enumerate(names):
            beta = (float(v.beta[1, 0]), float(v.beta_se[1, 0])) if i == 0 else (None, None)
            row = [f"D_{eq}", float(v.per_equation_rmse[i]), float(v.per_equation_r2[i]),
                   *beta, float(v.alpha[i, 0]), float(v.alpha_se[i, 0])]
            if beta[0] is not None and _significant(*beta, dof):
                stars.append([i, "beta"])
            if _significant(float(v.alpha[i, 0]), float(v.alpha_se[i, 0]), dof):
                stars.append([i, "alpha"])
            for j in range(k):
                for c, nm in enumerate(names):
                    coef, se = float(v.short_run[j][i, c]), float(v.short_run_se[j][i, c])
                    row += [coef, se]
                    if _significant(coef, se, dof):
                        stars.append([i, f"LD{j + 1}_{nm}"])
            rows.append(row)
        self.add(Table(
            "table8_vecm", "Vector error-correction model", cols, rows,
            meta={"sample": f"{v.start_year}-{v.start_year + v.n_obs - 1}", "rank": v.rank,
                  "lag": v.lag_order, "trend": v.trend.value, "star_level": COEF_STAR,
                  "normalisation": "beta = (1, beta)"},
            stars=stars,
        ))
        self.summary["vecm_beta"] = float(v.beta[1, 0])

    def regressions(self):
        rows, stars = [], []
        preds = [("M vs. P", self.Pa)]
        for w in self.run.ma_windows:
            ma = moving_average(self.P, w)
            preds.append((f"M vs. MA({w})", ma.window(max(ma.start_year, self.Ma.start_year), self.Ma.end_year)))
        for i, (label, x) in enumerate(preds):
            y, x = align(self.Ma, x)
            f = fit_ols(y.values, x.values)
            rows.append([label, _span(y), f.n_obs, f.slope, float(f.standard_errors[0]),
                         float(f.coefficients[-1]), float(f.standard_errors[-1]), f.r_squared, f.rmse])
            if _significant(f.slope, float(f.standard_errors[0]), f.n_obs - f.n_params):
                stars.append([i, "slope"])
        self.add(Table(
            "table9_regressions", "Regressions of the measured series",
            ["regression", "sample", "n_obs", "slope", "slope_se", "constant", "constant_se", "r2", "rmse"],
            rows,
            meta={"sample": _span(self.Ma), "star_level": COEF_STAR,
                  "moving_average": "trailing, applied to the predicted series"},
            stars=stars,
        ))
        self.summary["regression_slope"] = rows[0][3]
        self.summary["regression_r2"] = rows[0][7]


def _cv_audit(run: RunConfig) -> Table:
    cases = [("adf", "none"), ("adf", "constant"), ("dfgls", "constant")]
    rows = []
    for test, trend in cases:
        sim = simulate_critical_value(test, trend, run.mc_n_obs, "1%", run.mc_replications, run.mc_seed)
        tab = critical_value(test, trend, run.mc_n_obs, "1%")
        rows.append([test, trend, "1%", run.mc_n_obs, sim, tab, sim - tab])
    return Table(
        "cv_audit", "Monte-Carlo audit of embedded critical values",
        ["test", "trend", "level", "n_obs", "simulated", "tabulated", "difference"], rows,
        meta={"replications": run.mc_replications, "seed": run.mc_seed},
    )


def run_pipeline(dataset: DatasetConfig, run: RunConfig, through: str | None = None) -> Report:
    """Run every stage up to and including ``through`` (default: all)."""
    if through is not None and through not in STAGES:
        raise ConfigError(f"unknown stage {through!r}; choose from {STAGES}")
    inputs = load_inputs(dataset)
    stop = STAGES.index(through) if through is not None else len(STAGES) - 1
    report = Report(
        provenance={
            "library_version": __version__,
            "inputs": inputs.hashes,
            "dataset": {
                "vintages": list(inputs.vintages),
                "defining_age": dataset.defining_age,
                "year_range": [inputs.gdp_per_capita.start_year, inputs.gdp_per_capita.end_year],
            },
            "run_config": run.echo(),
        }
    )
    for label, cohort in inputs.vintages.items():
        v = _Vintage(label, run, inputs.gdp_per_capita, cohort)
        for stage in STAGES[: stop + 1]:
            try:
                getattr(v, stage)()
            except DemogrowthError as exc:
                report.errors.append({
                    "stage": stage,
                    "vintage": label,
                    "type": type(exc).__name__,
                    "message": str(exc),
                    "exit_code": exc.exit_code,
                })
                break
        report.tables.extend(v.tables)
        report.summary[label] = v.summary
    if through is None and run.mc_replications:
        try:
            report.tables.append(_cv_audit(run))
        except DemogrowthError as exc:
            report.errors.append({"stage": "cv_audit", "vintage": None, "type": type(exc).__name__,
                                  "message": str(exc), "exit_code": exc.exit_code})
    return report
