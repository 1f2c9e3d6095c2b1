"""Structured report, its JSON schema and the text/CSV/JSON writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from demogrowth.errors import ReportIOError

REPORT_VERSION = "1.0"
FORMATS = ("text", "json", "csv")


def _cell(v):
    """Normalise a cell to a JSON-native value; non-finite floats become None."""
    if v is None or isinstance(v, (str, bool)):
        return v
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    return f if math.isfinite(f) else None


@dataclass
class Table:
    """One report table.

    ``stars`` lists ``[row, column]`` pairs whose cells are significant at the
    level given in ``meta["star_level"]``; the text renderer appends ``*``.
    ``meta`` always names the sample range and test specification.
    """

    name: str
    title: str
    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    stars: list[list] = field(default_factory=list)
    vintage: str | None = None

    def __post_init__(self):
        self.columns = [str(c) for c in self.columns]
        self.rows = [[_cell(v) for v in row] for row in self.rows]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"table {self.name}: row width {len(row)} != {len(self.columns)}")
        self.stars = [[int(r), str(c)] for r, c in self.stars]

    def star(self, row: int, column: str) -> None:
        self.stars.append([row, column])

    @property
    def cell_count(self) -> int:
        return len(self.rows) * len(self.columns)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "title": self.title,
            "vintage": self.vintage,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "meta": self.meta,
            "notes": list(self.notes),
            "stars": [list(s) for s in self.stars],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Table:
        return cls(
            name=d["name"],
            title=d["title"],
            columns=d["columns"],
            rows=d["rows"],
            meta=d.get("meta", {}),
            notes=d.get("notes", []),
            stars=d.get("stars", []),
            vintage=d.get("vintage"),
        )


@dataclass
class Report:
    summary: dict = field(default_factory=dict)
    tables: list[Table] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    errors: list[dict] = field(default_factory=list)
    report_version: str = REPORT_VERSION

    @property
    def exit_code(self) -> int:
        return int(self.errors[0]["exit_code"]) if self.errors else 0

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def cell_count(self) -> int:
        return sum(t.cell_count for t in self.tables)

    def to_dict(self) -> dict:
        return {
            "report_version": self.report_version,
            "summary": self.summary,
            "tables": [t.to_dict() for t in self.tables],
            "provenance": self.provenance,
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        return cls(
            summary=d.get("summary", {}),
            tables=[Table.from_dict(t) for t in d.get("tables", [])],
            provenance=d.get("provenance", {}),
            errors=d.get("errors", []),
            report_version=d["report_version"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls.from_dict(json.loads(text))


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        a = abs(v)
        if a == 0 or 1e-3 <= a < 1e5:
            return f"{v:.4f}"
        if 1e5 <= a < 1e9:
            return f"{v:.0f}"
        return f"{v:.4e}"
    return str(v)


def render_table(t: Table) -> str:
    starred = {(r, c) for r, c in t.stars}
    cells = [
        [_fmt(v) + ("*" if (i, col) in starred else "") for v, col in zip(row, t.columns)]
        for i, row in enumerate(t.rows)
    ]
    widths = [max([len(c)] + [len(r[j]) for r in cells]) for j, c in enumerate(t.columns)]
    out = [t.title + (f" [{t.vintage}]" if t.vintage else "")]
    for k in sorted(t.meta):
        if k in ("star_level", "star_marks"):
            continue
        out.append(f"  {k}: {t.meta[k]}")
    out.append("  " + "  ".join(c.rjust(w) for c, w in zip(t.columns, widths)))
    out.append("  " + "  ".join("-" * w for w in widths))
    for r in cells:
        out.append("  " + "  ".join(c.rjust(w) for c, w in zip(r, widths)))
    if t.stars and "star_marks" in t.meta:
        out.append(f"  * {t.meta['star_marks']}")
    elif t.stars and "star_level" in t.meta:
        out.append(f"  * significant at {t.meta['star_level']}")
    out.extend(t.notes)
    return "\n".join(out)


def _flatten(d: dict, prefix: str = ""):
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict):
            yield from _flatten(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}", _fmt(v) if isinstance(v, float) else v


def render_text(report: Report) -> str:
    parts = [f"demogrowth report (schema {report.report_version})", ""]
    parts += [f"{k}: {v}" for k, v in _flatten(report.summary)]
    for t in report.tables:
        parts += ["", render_table(t)]
    if report.errors:
        parts.append("")
        for e in report.errors:
            parts.append(f"ERROR in stage {e['stage']}: {e['type']}: {e['message']}")
    parts += ["", "provenance:"]
    parts += [f"  {k}: {v}" for k, v in _flatten(report.provenance)]
    return "\n".join(parts) + "\n"


def table_csv(t: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.columns)
    for row in t.rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _csv_name(t: Table) -> str:
    base = t.name if not t.vintage else f"{t.name}__{t.vintage}"
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in base) + ".csv"


def emit_report(report: Report, fmt: str, out_dir) -> list[Path]:
    """Write ``report`` in one format under ``out_dir``; return the files written."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            files = {out / "report.json": report.to_json()}
        elif fmt == "text":
            files = {out / "report.txt": render_text(report)}
        else:
            files = {out / _csv_name(t): table_csv(t) for t in report.tables}
        for path, text in files.items():
            path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {out}: {exc.strerror or exc}") from exc
    return list(files)
