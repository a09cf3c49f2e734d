"""Per-gridpoint records shared by the bound checks and the CLI."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

__all__ = ["BoundReport", "format_number"]


def format_number(v):
    """17 significant digits for floats, plain text for the rest."""
    if getattr(getattr(v, "dtype", None), "kind", "") == "b":   # numpy booleans print like Python ones
        v = bool(v)
    if isinstance(v, bool) or v is None:
        return str(v).lower() if isinstance(v, bool) else ""
    if isinstance(v, (int,)):
        return str(v)
    try:
        f = float(v)
    except (TypeError, ValueError):
        return str(v)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    return f"{f:.17g}"


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    if hasattr(v, "value") and not isinstance(v, (int, float, str)):
        return v.value
    return v


@dataclass
class BoundReport:
    """Rows of a sweep (dicts with the same keys), fitted constants and a verdict.

    ``key`` names the columns the rows are sorted by.
    """

    name: str
    columns: list
    rows: list = field(default_factory=list)
    key: tuple = ()
    fitted: dict = field(default_factory=dict)
    passed: bool = True
    config: dict = field(default_factory=dict)

    def add(self, **row):
        self.rows.append(row)

    def sorted_rows(self):
        key = self.key or tuple(self.columns[:1])
        return sorted(self.rows, key=lambda r: tuple(_sort_key(r.get(k)) for k in key))

    def column(self, name):
        return [r[name] for r in self.sorted_rows()]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.sorted_rows():
            w.writerow([format_number(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_dict(self):
        return {
            "name": self.name,
            "config": _jsonable(self.config),
            "rows": [{c: _jsonable(r.get(c)) for c in self.columns} for r in self.sorted_rows()],
            "fitted": _jsonable(self.fitted),
            "pass": bool(self.passed),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _sort_key(v):
    if v is None:
        return (1, 0.0)
    try:
        return (0, float(v))
    except (TypeError, ValueError):
        return (2, str(v))
