"""Year-indexed annual series and the transforms built on top of them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from demogrowth.errors import AlignmentError, DegenerateInput, DomainError

__all__ = [
    "AnnualSeries",
    "AlignedPair",
    "diff",
    "lag",
    "moving_average",
    "growth_rate",
    "align",
    "align_many",
]


@dataclass(frozen=True, eq=False)
class AnnualSeries:
    """Contiguous annual observations starting at ``start_year``.

    ``values`` is stored as a read-only float64 array; element ``i`` belongs
    to year ``start_year + i``.
    """

    start_year: int
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size < 1:
            raise DegenerateInput("an AnnualSeries needs at least one value")
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise DomainError(f"non-finite value in year {int(self.start_year) + bad}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "start_year", int(self.start_year))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnnualSeries):
            return NotImplemented
        return (
            self.start_year == other.start_year
            and self.unit == other.unit
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.start_year, self.unit, self.values.tobytes()))

    def __repr__(self) -> str:
        return (
            f"AnnualSeries({self.start_year}-{self.end_year}, n={len(self)}, "
            f"unit={self.unit!r})"
        )

    @property
    def end_year(self) -> int:
        return self.start_year + len(self) - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.end_year + 1)

    def at(self, year: int) -> float:
        i = year - self.start_year
        if i < 0 or i >= len(self):
            raise AlignmentError(f"year {year} outside {self.start_year}-{self.end_year}")
        return float(self.values[i])

    def window(self, start: int | None = None, end: int | None = None) -> AnnualSeries:
        """Restrict to ``[start, end]`` (inclusive); ``None`` keeps that edge."""
        lo = self.start_year if start is None else max(start, self.start_year)
        hi = self.end_year if end is None else min(end, self.end_year)
        if hi < lo:
            raise DegenerateInput(
                f"window {start}-{end} does not intersect {self.start_year}-{self.end_year}"
            )
        i0 = lo - self.start_year
        return AnnualSeries(lo, self.values[i0 : i0 + hi - lo + 1], self.unit)

    def with_values(self, values, unit: str | None = None) -> AnnualSeries:
        return AnnualSeries(self.start_year, values, self.unit if unit is None else unit)


class AlignedPair(NamedTuple):
    a: AnnualSeries
    b: AnnualSeries


def _check_order(n: int, k: int, what: str) -> None:
    if k < 1:
        raise DegenerateInput(f"{what} must be a positive integer, got {k}")
    if k >= n:
        raise DegenerateInput(f"{what}={k} leaves no observations from a series of length {n}")


def diff(s: AnnualSeries, order: int = 1) -> AnnualSeries:
    """Difference ``order`` times; the result starts ``order`` years later."""
    _check_order(len(s), order, "difference order")
    return AnnualSeries(s.start_year + order, np.diff(s.values, n=order), s.unit)


def lag(s: AnnualSeries, k: int = 1) -> AnnualSeries:
    """Shift by ``k`` years: the value reported at year t is ``s(t - k)``."""
    _check_order(len(s), k, "lag")
    return AnnualSeries(s.start_year + k, s.values[:-k], s.unit)


def moving_average(s: AnnualSeries, window: int) -> AnnualSeries:
    """Trailing mean over ``window`` years, dated at the window's last year."""
    if window < 1:
        raise DegenerateInput(f"window must be positive, got {window}")
    if window > len(s):
        raise DegenerateInput(f"window {window} exceeds series length {len(s)}")
    csum = np.concatenate(([0.0], np.cumsum(s.values)))
    means = (csum[window:] - csum[:-window]) / window
    if window == 1:
        means = s.values.copy()
    return AnnualSeries(s.start_year + window - 1, means, s.unit)


def growth_rate(s: AnnualSeries) -> AnnualSeries:
    """Forward ratio ``(s[t+1] - s[t]) / s[t]`` dated at the base year t."""
    if len(s) < 2:
        raise DegenerateInput("growth rate needs at least two observations")
    v = s.values
    if np.any(v <= 0):
        year = s.start_year + int(np.flatnonzero(v <= 0)[0])
        raise DomainError(f"growth rate undefined for non-positive value in {year}")
    return AnnualSeries(s.start_year, np.diff(v) / v[:-1], "1/year")


def align(a: AnnualSeries, b: AnnualSeries) -> AlignedPair:
    """Truncate both series to their common years (at least two required)."""
    lo = max(a.start_year, b.start_year)
    hi = min(a.end_year, b.end_year)
    if hi - lo + 1 < 2:
        raise DegenerateInput(
            f"{a.start_year}-{a.end_year} and {b.start_year}-{b.end_year} "
            "overlap in fewer than 2 years"
        )
    return AlignedPair(a.window(lo, hi), b.window(lo, hi))


def align_many(series: Iterable[AnnualSeries]) -> list[AnnualSeries]:
    series = list(series)
    if not series:
        raise DegenerateInput("nothing to align")
    lo = max(s.start_year for s in series)
    hi = min(s.end_year for s in series)
    if hi - lo + 1 < 2:
        raise DegenerateInput("series overlap in fewer than 2 years")
    return [s.window(lo, hi) for s in series]


def require_aligned(*series: AnnualSeries) -> None:
    first = series[0]
    for s in series[1:]:
        if s.start_year != first.start_year or len(s) != len(first):
            raise AlignmentError(
                f"series {first.start_year}-{first.end_year} and "
                f"{s.start_year}-{s.end_year} are not aligned"
            )
