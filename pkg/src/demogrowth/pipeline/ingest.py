"""CSV ingestion into :class:`AnnualSeries`."""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path

import numpy as np

from demogrowth.errors import IngestError
from demogrowth.series import AnnualSeries


def ingest_csv(path, column: str | None = None, year_range=None, unit: str = "") -> AnnualSeries:
    """Read a ``year`` column plus one value column.

    ``column`` defaults to the only non-year column.  Rows are numbered from 1
    after the header, so data row N sits on line N+1 of the file.  Rows outside
    ``year_range`` (inclusive, either end may be ``None``) are dropped after
    the whole file has been validated.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise IngestError(f"{path}: cannot open ({exc.strerror})") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise IngestError(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        if "year" not in header:
            raise IngestError(f"{path}: no 'year' column in header {header}")
        yi = header.index("year")
        if column is None:
            others = [h for h in header if h != "year"]
            if len(others) != 1:
                raise IngestError(f"{path}: choose a value column from {others}")
            column = others[0]
        if column not in header:
            raise IngestError(f"{path}: column {column!r} not in header {header}")
        vi = header.index(column)

        years: list[int] = []
        values: list[float] = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"{path}: row {row_no} (line {row_no + 1})"
            if len(row) <= max(yi, vi):
                raise IngestError(f"{where}: expected {len(header)} fields, got {len(row)}")
            ytxt, vtxt = row[yi].strip(), row[vi].strip()
            if not (len(ytxt) == 4 and ytxt.isdigit()):
                raise IngestError(f"{where}: year {ytxt!r} is not a 4-digit integer")
            year = int(ytxt)
            try:
                value = float(vtxt)
            except ValueError:
                raise IngestError(f"{where}: non-numeric value {vtxt!r} in column {column!r}") from None
            if not math.isfinite(value):
                raise IngestError(f"{where}: non-finite value {vtxt!r} in column {column!r}")
            if years:
                prev = years[-1]
                if year == prev:
                    raise IngestError(f"{where}: duplicate year {year}")
                if year < prev:
                    raise IngestError(f"{where}: year {year} follows {prev}; years must increase")
                if year > prev + 1:
                    gap = f"{prev + 1}" if year == prev + 2 else f"{prev + 1}-{year - 1}"
                    raise IngestError(f"{path}: gap at {gap}")
            years.append(year)
            values.append(value)

    if not years:
        raise IngestError(f"{path}: no data rows")
    lo, hi = year_range if year_range is not None else (None, None)
    first = years[0] if lo is None else max(lo, years[0])
    last = years[-1] if hi is None else min(hi, years[-1])
    if last < first:
        raise IngestError(f"{path}: no rows inside year range {lo}-{hi}")
    vals = np.asarray(values[first - years[0]: last - years[0] + 1])
    return AnnualSeries(first, vals, unit)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
