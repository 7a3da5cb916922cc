"""Immutable columnar table: typed numpy columns plus a null mask each."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .. import dates

DTYPES = ("date", "int64", "float64", "string")
_NP_DTYPE = {"date": np.int64, "int64": np.int64, "float64": np.float64, "string": object}


class TableError(ValueError):
    """Schema or shape violation on a :class:`ColumnTable`."""


class DuplicateKeyError(TableError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Column:
    name: str
    dtype: str
    values: np.ndarray
    nulls: np.ndarray

    def __post_init__(self):
        if self.dtype not in DTYPES:
            raise TableError(f"column {self.name!r}: unknown dtype {self.dtype!r}")
        if self.values.shape != self.nulls.shape or self.values.ndim != 1:
            raise TableError(f"column {self.name!r}: values and null mask differ in length")

    @classmethod
    def build(cls, name: str, dtype: str, values, nulls=None) -> "Column":
        """Coerce ``values`` into a column; ``None`` entries become nulls."""
        if dtype not in DTYPES:
            raise TableError(f"column {name!r}: unknown dtype {dtype!r}")
        if isinstance(values, np.ndarray) and values.dtype != object and dtype != "string":
            vals = values.astype(_NP_DTYPE[dtype], copy=True)
            mask = np.zeros(len(vals), dtype=bool)
        else:
            seq = list(values)
            mask = np.fromiter((v is None for v in seq), dtype=bool, count=len(seq))
            if dtype == "string":
                vals = np.empty(len(seq), dtype=object)
                vals[:] = [None if v is None else str(v) for v in seq]
            elif dtype == "date":
                vals = np.array([0 if v is None else dates.to_days(v) for v in seq], dtype=np.int64)
            else:
                fill = 0
                vals = np.array([fill if v is None else v for v in seq], dtype=_NP_DTYPE[dtype])
        if nulls is not None:
            mask = mask | np.asarray(nulls, dtype=bool)
        if dtype == "string":
            vals[mask] = None
        else:
            vals[mask] = 0
        return cls(name, dtype, _frozen(vals), _frozen(mask))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def null_count(self) -> int:
        return int(self.nulls.sum())

    def take(self, indices: np.ndarray) -> "Column":
        """Gather rows; index -1 yields a null."""
        indices = np.asarray(indices, dtype=np.intp)
        missing = indices < 0
        safe = np.where(missing, 0, indices)
        if len(self) == 0:
            safe = np.zeros(len(indices), dtype=np.intp)
            vals = np.zeros(len(indices), dtype=self.values.dtype)
            if self.dtype == "string":
                vals = np.full(len(indices), None, dtype=object)
            mask = np.ones(len(indices), dtype=bool)
        else:
            vals = self.values[safe]
            mask = self.nulls[safe] | missing
        if missing.any():
            vals = vals.copy()
            vals[missing] = None if self.dtype == "string" else 0
        return Column(self.name, self.dtype, _frozen(vals), _frozen(mask))

    def renamed(self, name: str) -> "Column":
        return Column(name, self.dtype, self.values, self.nulls)

    def to_list(self) -> list:
        """Python values, ``None`` for nulls; dates as ISO strings."""
        out = []
        for v, null in zip(self.values.tolist(), self.nulls.tolist()):
            if null:
                out.append(None)
            elif self.dtype == "date":
                out.append(dates.to_iso(v))
            else:
                out.append(v)
        return out

    def equals(self, other: "Column") -> bool:
        if (self.name, self.dtype, len(self)) != (other.name, other.dtype, len(other)):
            return False
        if not np.array_equal(self.nulls, other.nulls):
            return False
        keep = ~self.nulls
        a, b = self.values[keep], other.values[keep]
        if self.dtype == "float64":
            return bool(np.array_equal(a, b, equal_nan=True))
        return bool(np.array_equal(a, b))


class ColumnTable:
    """Named, ordered collection of equal-length columns.

    Every transform returns a new table; column arrays are read-only.
    """

    __slots__ = ("name", "_columns", "_by_name", "row_count")

    def __init__(self, name: str, columns: Iterable[Column], row_count: int | None = None):
        cols = tuple(columns)
        by_name: dict[str, Column] = {}
        for c in cols:
            if c.name in by_name:
                raise TableError(f"table {name!r}: duplicate column name {c.name!r}")
            by_name[c.name] = c
        lengths = {len(c) for c in cols}
        if len(lengths) > 1:
            raise TableError(f"table {name!r}: ragged columns {sorted(lengths)}")
        n = lengths.pop() if lengths else (row_count or 0)
        if row_count is not None and row_count != n:
            raise TableError(f"table {name!r}: row_count {row_count} != column length {n}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_columns", cols)
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "row_count", n)

    def __setattr__(self, key, value):
        raise AttributeError("ColumnTable is immutable")

    @classmethod
    def from_columns(cls, name: str, spec: Mapping[str, tuple[str, object]]) -> "ColumnTable":
        """Build from ``{column: (dtype, values)}``."""
        return cls(name, [Column.build(k, dt, v) for k, (dt, v) in spec.items()])

    # -- access ---------------------------------------------------------
    @property
    def columns(self) -> tuple[Column, ...]:
        return self._columns

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self._columns]

    @property
    def schema(self) -> dict[str, str]:
        return {c.name: c.dtype for c in self._columns}

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return self.row_count

    def column(self, name: str) -> Column:
        try:
            return self._by_name[name]
        except KeyError:
            raise TableError(f"table {self.name!r} has no column {name!r}") from None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name).values

    def require(self, names: Sequence[str]) -> None:
        missing = [n for n in names if n not in self._by_name]
        if missing:
            raise TableError(f"table {self.name!r} is missing column(s): {', '.join(missing)}")

    def __repr__(self) -> str:
        cols = ", ".join(f"{c.name}:{c.dtype}" for c in self._columns)
        return f"ColumnTable({self.name!r}, rows={self.row_count}, [{cols}])"

    # -- transforms -----------------------------------------------------
    def renamed(self, name: str) -> "ColumnTable":
        return ColumnTable(name, self._columns, self.row_count)

    def take(self, indices) -> "ColumnTable":
        indices = np.asarray(indices, dtype=np.intp)
        return ColumnTable(self.name, [c.take(indices) for c in self._columns], len(indices))

    def filter(self, keep: np.ndarray) -> "ColumnTable":
        return self.take(np.flatnonzero(np.asarray(keep, dtype=bool)))

    def select(self, names: Sequence[str]) -> "ColumnTable":
        self.require(names)
        return ColumnTable(self.name, [self._by_name[n] for n in names], self.row_count)

    def drop(self, names: Sequence[str]) -> "ColumnTable":
        self.require(names)
        gone = set(names)
        return ColumnTable(self.name, [c for c in self._columns if c.name not in gone], self.row_count)

    def with_column(self, col: Column) -> "ColumnTable":
        """Replace a same-named column in place, else append."""
        if len(col) != self.row_count and self._columns:
            raise TableError(f"column {col.name!r} has {len(col)} rows, table has {self.row_count}")
        if col.name in self._by_name:
            cols = [col if c.name == col.name else c for c in self._columns]
        else:
            cols = [*self._columns, col]
        return ColumnTable(self.name, cols)

    def rename_columns(self, mapping: Mapping[str, str]) -> "ColumnTable":
        self.require(list(mapping))
        return ColumnTable(self.name, [c.renamed(mapping.get(c.name, c.name)) for c in self._columns],
                           self.row_count)

    def concat(self, other: "ColumnTable", name: str | None = None) -> "ColumnTable":
        if self.schema != other.schema or self.column_names != other.column_names:
            raise TableError(f"cannot concatenate {self.name!r} and {other.name!r}: schemas differ")
        cols = []
        for a in self._columns:
            b = other.column(a.name)
            cols.append(Column(a.name, a.dtype,
                               _frozen(np.concatenate([a.values, b.values])),
                               _frozen(np.concatenate([a.nulls, b.nulls]))))
        return ColumnTable(name or self.name, cols, self.row_count + other.row_count)

    def any_null(self) -> np.ndarray:
        mask = np.zeros(self.row_count, dtype=bool)
        for c in self._columns:
            mask |= c.nulls
        return mask

    def equals(self, other: "ColumnTable") -> bool:
        if self.column_names != other.column_names or self.row_count != other.row_count:
            return False
        return all(a.equals(other.column(a.name)) for a in self._columns)

    def rows(self) -> list[tuple]:
        """Materialise as Python tuples (tests and small reports only)."""
        return list(zip(*(c.to_list() for c in self._columns))) if self._columns else []


def _key_positions(left: Column, right: Column) -> np.ndarray:
    """Row in ``right`` matching each left key, -1 where unmatched."""
    rkeep = ~right.nulls
    rvals = right.values[rkeep]
    rrows = np.flatnonzero(rkeep)
    if left.dtype == "string":
        lookup: dict = {}
        for v, r in zip(rvals.tolist(), rrows.tolist()):
            if v in lookup:
                raise DuplicateKeyError(f"duplicate key {v!r} in {right.name!r}")
            lookup[v] = r
        pos = np.fromiter((lookup.get(v, -1) for v in left.values.tolist()), dtype=np.intp,
                          count=len(left))
    else:
        order = np.argsort(rvals, kind="stable")
        sorted_keys = rvals[order]
        if sorted_keys.size > 1:
            dup = np.flatnonzero(sorted_keys[1:] == sorted_keys[:-1])
            if dup.size:
                raise DuplicateKeyError(f"duplicate key {sorted_keys[dup[0]]!r} in {right.name!r}")
        if sorted_keys.size == 0:
            pos = np.full(len(left), -1, dtype=np.intp)
        else:
            at = np.searchsorted(sorted_keys, left.values)
            at_c = np.minimum(at, sorted_keys.size - 1)
            hit = sorted_keys[at_c] == left.values
            pos = np.where(hit, rrows[order][at_c], -1).astype(np.intp)
    pos[left.nulls] = -1
    return pos


def join_lookup(left: ColumnTable, right: ColumnTable, on: str, how: str = "inner",
                name: str | None = None) -> ColumnTable:
    """Many-to-one join: attach ``right``'s columns to each ``left`` row by key.

    ``right`` keys must be unique. ``how`` is ``"inner"`` (drop unmatched
    left rows) or ``"left"`` (keep them, right columns null).
    """
    if how not in ("inner", "left"):
        raise TableError(f"unsupported join type {how!r}")
    left.require([on])
    right.require([on])
    lk, rk = left.column(on), right.column(on)
    if lk.dtype != rk.dtype:
        raise TableError(f"join key {on!r}: dtype {lk.dtype} vs {rk.dtype}")
    pos = _key_positions(lk, rk)
    clash = [c for c in right.column_names if c != on and c in left]
    if clash:
        raise TableError(f"join would duplicate column(s): {', '.join(clash)}")
    if how == "inner":
        keep = np.flatnonzero(pos >= 0)
        base = left.take(keep)
        pos = pos[keep]
    else:
        base = left
    cols = list(base.columns) + [right.column(c).take(pos) for c in right.column_names if c != on]
    return ColumnTable(name or left.name, cols, base.row_count)
