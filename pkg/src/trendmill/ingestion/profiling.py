"""Per-column data-quality profile."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import dates
from .table import ColumnTable


@dataclass(frozen=True)
class ColumnProfile:
    name: str
    dtype: str
    null_count: int
    distinct_count: int
    min: object = None
    max: object = None


@dataclass(frozen=True)
class ProfileSummary:
    table: str
    row_count: int
    columns: tuple[ColumnProfile, ...]

    def __getitem__(self, name: str) -> ColumnProfile:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"table": self.table, "row_count": self.row_count,
                "columns": [asdict(c) for c in self.columns]}


def profile(table: ColumnTable) -> ProfileSummary:
    """Null counts, distinct non-null counts, and min/max of numeric and date columns."""
    out = []
    for col in table.columns:
        present = col.values[~col.nulls]
        distinct = int(np.unique(present).size) if present.size else 0
        lo = hi = None
        if present.size and col.dtype != "string":
            if col.dtype == "float64":
                finite = present[~np.isnan(present)]
                if finite.size:
                    lo, hi = float(finite.min()), float(finite.max())
            else:
                lo, hi = int(present.min()), int(present.max())
                if col.dtype == "date":
                    lo, hi = dates.to_iso(lo), dates.to_iso(hi)
        out.append(ColumnProfile(col.name, col.dtype, col.null_count, distinct, lo, hi))
    return ProfileSummary(table.name, table.row_count, tuple(out))
