"""INI configuration for pipeline runs.

Only the file named on the command line is read; environment variables are
never consulted.  Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from pathlib import Path

from demogrowth.errors import ConfigError
from demogrowth.unitroot import TrendSpec

FORMATS = ("text", "json", "csv")


@dataclass(frozen=True)
class SeriesSource:
    path: str
    column: str | None = None


@dataclass(frozen=True)
class DatasetConfig:
    """Input files and sample limits.

    GDP per capita is either read directly (``gdp_per_capita``) or formed as
    ``gdp_total / population_15plus``.  ``n9_second`` names an optional second
    vintage of the cohort series that is run through the same pipeline.
    """

    n9_measured: SeriesSource
    gdp_per_capita: SeriesSource | None = None
    gdp_total: SeriesSource | None = None
    population_15plus: SeriesSource | None = None
    n9_second: SeriesSource | None = None
    vintage_label: str = "primary"
    second_label: str = "second"
    defining_age: int = 9
    start_year: int | None = None
    end_year: int | None = None
    output_dir: str = "out"
    formats: tuple[str, ...] = ("text", "json")
    base_dir: str = "."

    def __post_init__(self):
        if self.gdp_per_capita is None and (self.gdp_total is None or self.population_15plus is None):
            raise ConfigError(
                "supply gdp_per_capita, or both gdp_total and population_15plus"
            )
        if self.start_year is not None and self.end_year is not None and self.end_year < self.start_year:
            raise ConfigError(f"empty year range {self.start_year}-{self.end_year}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats {bad}; choose from {FORMATS}")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def sources(self) -> dict[str, SeriesSource]:
        names = ("n9_measured", "gdp_per_capita", "gdp_total", "population_15plus", "n9_second")
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}


@dataclass(frozen=True)
class RunConfig:
    initial_year: int | None = None
    fit_start: int | None = None
    analysis_start: int | None = None
    a_bounds: tuple[float, float] = (1.0, 10000.0)
    adf_max_lag: int = 3
    dfgls_max_lag: int = 4
    diff_max_lag: int = 3
    var_max_lag: int = 4
    johansen_lag: int = 2
    johansen_trend: TrendSpec = TrendSpec.CONSTANT
    var_lag: int = 2
    vecm_rank: int = 1
    lm_lags: tuple[int, ...] = (1, 2)
    ma_windows: tuple[int, ...] = (2, 3)
    mc_replications: int = 0
    mc_seed: int = 12345
    mc_n_obs: int = 41
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        lags = {
            "adf_max_lag": self.adf_max_lag,
            "dfgls_max_lag": self.dfgls_max_lag,
            "diff_max_lag": self.diff_max_lag,
            "var_max_lag": self.var_max_lag,
            "johansen_lag": self.johansen_lag,
            "var_lag": self.var_lag,
        }
        for name, v in lags.items():
            if v < 1:
                raise ConfigError(f"{name} must be positive, got {v}")
        if any(l < 1 for l in self.lm_lags) or any(w < 1 for w in self.ma_windows):
            raise ConfigError("lm_lags and ma_windows must be positive")
        lo, hi = self.a_bounds
        if not 0 < lo < hi:
            raise ConfigError(f"invalid calibration bounds {self.a_bounds}")
        if self.mc_replications and self.mc_replications < 1000:
            raise ConfigError("Monte-Carlo replications must be 0 (off) or at least 1000")

    def echo(self) -> dict:
        d = asdict(self)
        d["johansen_trend"] = self.johansen_trend.value
        for k in ("a_bounds", "lm_lags", "ma_windows"):
            d[k] = list(d[k])
        d.pop("extra")
        return d


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _source(sec, key: str) -> SeriesSource | None:
    path = sec.get(key, "").strip()
    if not path:
        return None
    col = sec.get(f"{key}_column", "").strip() or None
    # Short aliases used in the shipped templates.
    if col is None:
        alias = {"gdp_per_capita": "gdp_column", "n9_measured": "n9_column", "n9_second": "n9_second_column"}
        col = sec.get(alias.get(key, ""), "").strip() or None
    return SeriesSource(path, col)


def _opt_int(sec, key: str) -> int | None:
    v = sec.get(key, "").strip()
    return int(v) if v else None


def load_config(path) -> tuple[DatasetConfig, RunConfig]:
    """Parse an INI file with ``[data]``, ``[model]``, ``[tests]`` and ``[montecarlo]``."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if "data" not in cp:
        raise ConfigError(f"{path} has no [data] section")
    data = cp["data"]
    model = cp["model"] if "model" in cp else {}
    tests = cp["tests"] if "tests" in cp else {}
    mc = cp["montecarlo"] if "montecarlo" in cp else {}
    try:
        n9 = _source(data, "n9_measured")
        if n9 is None:
            raise ConfigError("[data] n9_measured is required")
        dataset = DatasetConfig(
            n9_measured=n9,
            gdp_per_capita=_source(data, "gdp_per_capita"),
            gdp_total=_source(data, "gdp_total"),
            population_15plus=_source(data, "population_15plus"),
            n9_second=_source(data, "n9_second"),
            vintage_label=data.get("vintage_label", "primary").strip(),
            second_label=data.get("second_label", "second").strip(),
            defining_age=int(data.get("defining_age", "9")),
            start_year=_opt_int(data, "start_year"),
            end_year=_opt_int(data, "end_year"),
            output_dir=data.get("output_dir", "out").strip(),
            formats=tuple(f.strip() for f in data.get("formats", "text, json").split(",") if f.strip()),
            base_dir=str(path.parent),
        )
        run = RunConfig(
            initial_year=_opt_int(model, "initial_year"),
            fit_start=_opt_int(model, "fit_start"),
            analysis_start=_opt_int(tests, "analysis_start"),
            a_bounds=(float(model.get("a_lower", "1")), float(model.get("a_upper", "10000"))),
            adf_max_lag=int(tests.get("adf_max_lag", "3")),
            dfgls_max_lag=int(tests.get("dfgls_max_lag", "4")),
            diff_max_lag=int(tests.get("diff_max_lag", "3")),
            var_max_lag=int(tests.get("var_max_lag", "4")),
            johansen_lag=int(tests.get("johansen_lag", "2")),
            johansen_trend=TrendSpec.parse(tests.get("johansen_trend", "constant")),
            var_lag=int(tests.get("var_lag", "2")),
            vecm_rank=int(tests.get("vecm_rank", "1")),
            lm_lags=_ints(tests.get("lm_lags", "1, 2")),
            ma_windows=_ints(tests.get("ma_windows", "2, 3")),
            mc_replications=int(mc.get("replications", "0")),
            mc_seed=int(mc.get("seed", "12345")),
            mc_n_obs=int(mc.get("n_obs", "41")),
        )
    except ValueError as exc:
        raise ConfigError(f"bad value in {path}: {exc}") from exc
    return dataset, run
