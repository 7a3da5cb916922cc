"""Named aggregation results and their file forms (CSV, JSON, two-column plot data)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class Report:
    """Ordered rows under fixed column names; ``x``/``y`` pick the plot-data pair."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    x: str | None = None
    y: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        rows = tuple(tuple(_plain(v) for v in r) for r in self.rows)
        for r in rows:
            if len(r) != len(self.columns):
                raise ValueError(f"report {self.name!r}: row width {len(r)} != {len(self.columns)}")
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def mapping(self, key: str, value: str) -> dict:
        return dict(zip(self.column(key), self.column(value)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_cell(v) for v in r])
        return buf.getvalue()

    def plot_csv(self) -> str:
        xs = self.column(self.x or self.columns[0])
        ys = self.column(self.y or self.columns[-1])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        for a, b in zip(xs, ys):
            w.writerow([format_cell(a), format_cell(b)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "columns": list(self.columns),
                           "rows": [list(r) for r in self.rows]}, sort_keys=True)

    def write(self, directory, filename: str | None = None, plot: bool = True) -> list[Path]:
        """Write ``<filename>`` (default ``<name>.csv``) and optional ``<stem>.plot.csv``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / (filename or f"{self.name}.csv")
        path.write_text(self.to_csv(), encoding="utf-8")
        out = [path]
        if plot:
            ppath = path.with_name(path.stem + ".plot.csv")
            ppath.write_text(self.plot_csv(), encoding="utf-8")
            out.append(ppath)
        return out


def group_index(keys: np.ndarray):
    """``(unique_keys, inverse)`` with keys sorted ascending."""
    if keys.dtype == object:
        uniq, inv = np.unique(keys.astype(str), return_inverse=True)
        return uniq.astype(object), inv
    return np.unique(keys, return_inverse=True)


def grouped_fsum(values: np.ndarray, inverse: np.ndarray, n_groups: int) -> list[float]:
    """Exactly rounded per-group sums, hence independent of row order."""
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(n_groups + 1))
    vals = values[order]
    return [math.fsum(vals[bounds[g]:bounds[g + 1]].tolist()) for g in range(n_groups)]


def ranked(rows: Sequence[tuple], by: int, key: int = 0) -> list[tuple]:
    """Descending by column ``by``; ties ascending by column ``key``."""
    return sorted(rows, key=lambda r: (-r[by], r[key]))
