"""Synthetic data generated by the model's own forward map.

The defining-age cohort follows a Gaussian random walk, GDP per capita is
built from it with :func:`demogrowth.model.forward_gdp`, and the "measured"
cohort adds independent Gaussian noise.  Predicting the cohort from the
generated GDP with the true parameters returns the noiseless path exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from demogrowth.model import ModelParams, forward_gdp
from demogrowth.series import AnnualSeries

# Ground-truth parameters of the bundled fixture.
TRUE_A = 547.1325
TRUE_N9_INITIAL = 3.9e6
DEFAULT_SEED = 20070300


@dataclass(frozen=True)
class Fixture:
    params: ModelParams
    gdp_per_capita: AnnualSeries
    n9_true: AnnualSeries
    n9_measured: AnnualSeries
    seed: int
    noise_sd: float


def make_fixture(
    seed: int = DEFAULT_SEED,
    *,
    A: float = TRUE_A,
    n9_initial: float = TRUE_N9_INITIAL,
    start_year: int = 1959,
    end_year: int = 2002,
    noise_sd: float = 1.5e5,
    step_sd: float = 1.0e5,
    gdp_initial: float = 20000.0,
) -> Fixture:
    rng = np.random.default_rng(seed)
    n = end_year - start_year + 1
    steps = rng.normal(0.0, step_sd, n - 1)
    path = n9_initial + np.concatenate(([0.0], np.cumsum(steps)))
    n9_true = AnnualSeries(start_year, path, "persons")
    gdp = forward_gdp(n9_true, A, gdp_initial)
    noise = rng.normal(0.0, noise_sd, n) if noise_sd > 0 else np.zeros(n)
    measured = AnnualSeries(start_year, path + noise, "persons")
    return Fixture(
        ModelParams(A, n9_initial, start_year), gdp, n9_true, measured, seed, noise_sd
    )


def write_series_csv(path: Path, series: AnnualSeries, column: str = "value") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year", column])
        for year, v in zip(series.years, series.values):
            w.writerow([int(year), repr(float(v))])


CONFIG_TEMPLATE = """\
# Synthetic fixture generated with seed {seed}
[data]
gdp_per_capita = gdp_per_capita.csv
gdp_column = gdp_per_capita
n9_measured = n9_measured.csv
n9_column = n9
vintage_label = synthetic
defining_age = 9
output_dir = out
formats = text, json, csv

[model]
initial_year = {start}
fit_start = {analysis}
a_lower = 1
a_upper = 10000

[tests]
analysis_start = {analysis}
adf_max_lag = 3
dfgls_max_lag = 4
diff_max_lag = 3
var_max_lag = 4
johansen_lag = 2
johansen_trend = constant
var_lag = 2
vecm_rank = 1
lm_lags = 1, 2
ma_windows = 2, 3

[montecarlo]
replications = 0
seed = 12345
n_obs = 41
"""


def write_fixture(directory, seed: int = DEFAULT_SEED, analysis_start: int = 1962) -> Path:
    """Write the fixture CSVs and a matching config file; return the config path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    fx = make_fixture(seed)
    write_series_csv(d / "gdp_per_capita.csv", fx.gdp_per_capita, "gdp_per_capita")
    write_series_csv(d / "n9_measured.csv", fx.n9_measured, "n9")
    cfg = d / "config.ini"
    cfg.write_text(
        CONFIG_TEMPLATE.format(seed=seed, start=fx.params.initial_year, analysis=analysis_start),
        encoding="utf-8",
    )
    return cfg
