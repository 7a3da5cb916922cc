"""Declarative cleaning rules applied in order to a :class:`ColumnTable`."""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .. import dates, kernels
from .table import Column, ColumnTable, TableError

RULE_KINDS = ("fill_null_constant", "drop_rows_matching", "drop_columns", "map_column",
              "parse_unix_timestamp")

# A state cell is valid only if made of ASCII letters and spaces.
STATE_ALLOWED = string.ascii_letters + " "
INVALID_STATE_PATTERN = "[^A-Za-z ]"

MILLIS_THRESHOLD = 10**12

_STRING_MAPS = {
    "strip": str.strip,
    "lower": str.lower,
    "upper": str.upper,
    "title": str.title,
    # "Gift_Cards.csv" -> "Gift Cards"
    "file_stem": lambda s: s.rsplit("/", 1)[-1].split(".", 1)[0].replace("_", " "),
}


class CleaningError(ValueError):
    pass


@dataclass(frozen=True)
class CleaningRule:
    kind: str
    targets: tuple[str, ...]
    parameter: Any = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise CleaningError(f"unknown rule kind {self.kind!r}")
        if isinstance(self.targets, str):
            object.__setattr__(self, "targets", (self.targets,))
        if not self.targets:
            raise CleaningError(f"{self.kind}: no target columns")


def fill_null(columns: str | Sequence[str], value) -> CleaningRule:
    return CleaningRule("fill_null_constant", _as_tuple(columns), value)


def drop_matching(column: str, pattern: str) -> CleaningRule:
    return CleaningRule("drop_rows_matching", (column,), pattern)


def drop_columns(*columns: str) -> CleaningRule:
    return CleaningRule("drop_columns", tuple(columns))


def map_column(column: str, mapping) -> CleaningRule:
    """``mapping`` is a dict, a named map (strip/lower/upper/title) or ``coalesce:<column>``."""
    if isinstance(mapping, dict):
        mapping = tuple(sorted(mapping.items()))
    return CleaningRule("map_column", (column,), mapping)


def parse_unix_timestamp(column: str) -> CleaningRule:
    return CleaningRule("parse_unix_timestamp", (column,))


def _as_tuple(columns) -> tuple[str, ...]:
    return (columns,) if isinstance(columns, str) else tuple(columns)


def _fill(col: Column, value) -> Column:
    _check_fill_type(col, value)
    if not col.nulls.any():
        return col
    vals = col.values.copy()
    if col.dtype == "date":
        value = dates.to_days(value)
    vals[col.nulls] = value
    return Column.build(col.name, col.dtype, vals, nulls=np.zeros(len(col), dtype=bool))


def _check_fill_type(col: Column, value) -> None:
    ok = {
        "int64": isinstance(value, (int, np.integer)) and not isinstance(value, bool),
        "float64": isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool),
        "string": isinstance(value, str),
        "date": _is_date_like(value),
    }[col.dtype]
    if not ok:
        raise CleaningError(f"fill value {value!r} is incompatible with {col.dtype} column {col.name!r}")


def _is_date_like(value) -> bool:
    if isinstance(value, bool):
        return False
    try:
        dates.to_days(value)
    except (TypeError, ValueError):
        return False
    return True


def match_mask(col: Column, pattern: str) -> np.ndarray:
    """Rows whose (non-null) string cell contains a match of ``pattern``."""
    if col.dtype != "string":
        raise CleaningError(f"drop_rows_matching needs a string column; {col.name!r} is {col.dtype}")
    if pattern == INVALID_STATE_PATTERN:
        return kernels.outside_charset_mask(col.values, STATE_ALLOWED)
    try:
        rx = re.compile(pattern)
    except (re.error, TypeError) as exc:
        raise CleaningError(f"invalid pattern {pattern!r}: {exc}") from None
    search = rx.search
    return np.fromiter((v is not None and search(v) is not None for v in col.values.tolist()),
                       dtype=bool, count=len(col))


def _map(table: ColumnTable, col: Column, mapping) -> Column:
    if isinstance(mapping, str) and mapping.startswith("coalesce:"):
        source = table.column(mapping.split(":", 1)[1])
        if source.dtype != col.dtype:
            raise CleaningError(f"coalesce {col.name!r} from {source.name!r}: dtype mismatch")
        use = col.nulls & ~source.nulls
        vals = col.values.copy()
        vals[use] = source.values[use]
        return Column.build(col.name, col.dtype, vals, nulls=col.nulls & source.nulls)
    if col.dtype != "string":
        raise CleaningError(f"map_column needs a string column; {col.name!r} is {col.dtype}")
    if isinstance(mapping, tuple):
        lookup = dict(mapping)
        fn = lambda v: lookup.get(v, v)  # noqa: E731
    elif mapping in _STRING_MAPS:
        fn = _STRING_MAPS[mapping]
    else:
        raise CleaningError(f"unknown mapping {mapping!r}")
    uniq, inv = np.unique(col.values[~col.nulls].astype(str), return_inverse=True)
    mapped = np.array([fn(u) for u in uniq.tolist()], dtype=object)
    vals = np.full(len(col), None, dtype=object)
    vals[~col.nulls] = mapped[inv] if uniq.size else []
    return Column.build(col.name, "string", vals, nulls=col.nulls)


def unix_to_days(values: np.ndarray) -> np.ndarray:
    """Seconds or milliseconds since the epoch (per value, by magnitude) to UTC day numbers."""
    v = np.asarray(values, dtype=np.int64)
    millis = np.abs(v) >= MILLIS_THRESHOLD
    return np.where(millis, np.floor_divide(v, 86_400_000), np.floor_divide(v, 86_400))


def _parse_ts(col: Column) -> Column:
    if col.dtype == "float64":
        vals = np.floor(col.values).astype(np.int64)
    elif col.dtype == "int64":
        vals = col.values
    else:
        raise CleaningError(f"parse_unix_timestamp needs a numeric column; {col.name!r} is {col.dtype}")
    return Column.build(col.name, "date", unix_to_days(vals), nulls=col.nulls)


def apply_rule(table: ColumnTable, rule: CleaningRule) -> ColumnTable:
    try:
        table.require(rule.targets)
    except TableError as exc:
        raise CleaningError(str(exc)) from None
    if rule.kind == "drop_columns":
        return table.drop(rule.targets)
    if rule.kind == "drop_rows_matching":
        bad = np.zeros(table.row_count, dtype=bool)
        for name in rule.targets:
            bad |= match_mask(table.column(name), rule.parameter)
        return table.filter(~bad) if bad.any() else table
    for name in rule.targets:
        col = table.column(name)
        if rule.kind == "fill_null_constant":
            col = _fill(col, rule.parameter)
        elif rule.kind == "map_column":
            col = _map(table, col, rule.parameter)
        else:
            col = _parse_ts(col)
        table = table.with_column(col)
    return table


def clean(table: ColumnTable, rules: Sequence[CleaningRule]) -> ColumnTable:
    """Apply ``rules`` in declared order, returning a new table."""
    for rule in rules:
        table = apply_rule(table, rule)
    return table
