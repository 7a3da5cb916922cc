"""CSV (RFC-4180) and native ``.ctbl`` cache I/O for :class:`ColumnTable`."""
from __future__ import annotations

import csv
import os
import re
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .. import dates
from .table import Column, ColumnTable, TableError

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?|nan|inf|infinity)$",
                       re.IGNORECASE)

CTBL_MAGIC = b"CTBL1"
_DTYPE_CODE = {"date": 0, "int64": 1, "float64": 2, "string": 3}
_CODE_DTYPE = {v: k for k, v in _DTYPE_CODE.items()}


class CsvFormatError(ValueError):
    """Malformed CSV input; ``line`` is the 1-based physical line when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = str(path) if path is not None else "<csv>"
        if line is not None:
            where = f"{where}: line {line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class CacheFormatError(ValueError):
    pass


def _all_match(regex: re.Pattern, cells: np.ndarray) -> bool:
    return all(regex.match(v) for v in np.unique(cells).tolist())


def _parse_as(dtype: str, cells: np.ndarray) -> np.ndarray:
    """Convert non-empty string cells; raises ValueError/OverflowError when they don't fit."""
    if dtype == "date":
        if not _all_match(dates.ISO_DATE_RE, cells):
            raise ValueError("not YYYY-MM-DD")
        return dates.parse_iso_array(cells)
    if dtype == "int64":
        if not _all_match(_INT_RE, cells):
            raise ValueError("not an integer")
        return cells.astype(np.int64)
    if dtype == "float64":
        if not _all_match(_FLOAT_RE, cells):
            raise ValueError("not a number")
        return cells.astype(np.float64)
    return cells.astype(object)


def _column_from_cells(name: str, cells: np.ndarray, dtype: str | None) -> Column:
    empty = cells == ""
    filled = cells[~empty]
    if dtype is None:
        if filled.size == 0:
            dtype = "float64"
        else:
            for candidate in ("date", "int64", "float64"):
                try:
                    parsed = _parse_as(candidate, filled)
                except (ValueError, OverflowError):
                    continue
                dtype = candidate
                break
            else:
                dtype = "string"
                parsed = filled.astype(object)
    else:
        parsed = _parse_as(dtype, filled) if filled.size else None
    if dtype == "string":
        vals = np.full(cells.shape[0], None, dtype=object)
        if filled.size:
            vals[~empty] = filled.astype(object)
    else:
        vals = np.zeros(cells.shape[0], dtype=np.float64 if dtype == "float64" else np.int64)
        if filled.size:
            vals[~empty] = parsed
    return Column.build(name, dtype, vals, nulls=empty)


def load_csv(path, schema_hint: Mapping[str, str] | None = None, name: str | None = None) -> ColumnTable:
    """Read a headed CSV file into a typed :class:`ColumnTable`.

    Without a hint each column is typed as date if every non-empty cell is
    YYYY-MM-DD, else int64, else float64, else string. Empty cells are nulls.
    """
    path = Path(path)
    table_name = name or path.name.split(".")[0]
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CsvFormatError(f"cannot read file ({exc.strerror})", path) from exc
    with fh:
        reader = csv.reader(fh, strict=True)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("missing header line", path, 1) from None
        except csv.Error as exc:
            raise CsvFormatError(str(exc), path, reader.line_num) from None
        seen = set()
        for h in header:
            if h in seen:
                raise CsvFormatError(f"duplicate column name {h!r} in header", path, 1)
            seen.add(h)
        width = len(header)
        rows = []
        lines = []
        try:
            for row in reader:
                if len(row) != width:
                    if not row and width == 1:
                        row = [""]
                    elif not row:
                        continue
                    else:
                        raise CsvFormatError(f"expected {width} fields, found {len(row)}",
                                             path, reader.line_num)
                rows.append(row)
                lines.append(reader.line_num)
        except csv.Error as exc:
            raise CsvFormatError(str(exc), path, reader.line_num) from None

    hint = dict(schema_hint or {})
    unknown = set(hint) - set(header)
    if unknown:
        raise TableError(f"schema hint names unknown column(s): {', '.join(sorted(unknown))}")
    columns = []
    transposed = list(zip(*rows)) if rows else [()] * width
    for j, col_name in enumerate(header):
        cells = np.array(transposed[j], dtype=str) if rows else np.array([], dtype=str)
        try:
            columns.append(_column_from_cells(col_name, cells, hint.get(col_name)))
        except (ValueError, OverflowError) as exc:
            bad = _first_bad_row(cells, hint[col_name])
            line = lines[bad] if bad is not None else None
            raise CsvFormatError(f"column {col_name!r}: {exc}", path, line) from None
    return ColumnTable(table_name, columns, len(rows))


def _first_bad_row(cells: np.ndarray, dtype: str) -> int | None:
    for i, cell in enumerate(cells.tolist()):
        if cell == "":
            continue
        try:
            _parse_as(dtype, np.array([cell]))
        except (ValueError, OverflowError):
            return i
    return None


def _format_column(col: Column) -> list[str]:
    vals = col.values.tolist()
    if col.dtype == "date":
        out = [dates.to_iso(v) for v in vals]
    elif col.dtype == "float64":
        out = [repr(v) for v in vals]
    elif col.dtype == "int64":
        out = [str(v) for v in vals]
    else:
        out = ["" if v is None else v for v in vals]
    for i in np.flatnonzero(col.nulls).tolist():
        out[i] = ""
    return out


def write_csv(table: ColumnTable, path) -> Path:
    """Write ``table`` as RFC-4180 CSV (LF line endings, nulls as empty cells)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    formatted = [_format_column(c) for c in table.columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.column_names)
        writer.writerows(zip(*formatted))
    return path


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def write_ctbl(table: ColumnTable, path) -> Path:
    """Write the native binary cache: magic ``CTBL1`` then little-endian fields."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    parts = [CTBL_MAGIC, _pack_str(table.name), struct.pack("<IQ", len(table.columns), table.row_count)]
    for col in table.columns:
        parts.append(_pack_str(col.name))
        parts.append(struct.pack("<B", _DTYPE_CODE[col.dtype]))
        parts.append(col.nulls.astype(np.uint8).tobytes())
        if col.dtype == "string":
            encoded = [b"" if v is None else v.encode("utf-8") for v in col.values.tolist()]
            parts.append(np.array([len(e) for e in encoded], dtype="<u4").tobytes())
            parts.append(b"".join(encoded))
        elif col.dtype == "float64":
            parts.append(col.values.astype("<f8").tobytes())
        else:
            parts.append(col.values.astype("<i8").tobytes())
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_bytes(b"".join(parts))
    tmp.replace(path)
    return path


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CacheFormatError("truncated cache file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        return self.take(n).decode("utf-8")


def read_ctbl(path) -> ColumnTable:
    data = Path(path).read_bytes()
    if not data.startswith(CTBL_MAGIC):
        raise CacheFormatError(f"{path}: bad magic (expected {CTBL_MAGIC!r})")
    r = _Reader(data)
    r.take(len(CTBL_MAGIC))
    name = r.string()
    ncols, nrows = r.unpack("<IQ")
    cols = []
    for _ in range(ncols):
        col_name = r.string()
        (code,) = r.unpack("<B")
        if code not in _CODE_DTYPE:
            raise CacheFormatError(f"{path}: unknown dtype code {code}")
        dtype = _CODE_DTYPE[code]
        nulls = np.frombuffer(r.take(nrows), dtype=np.uint8).astype(bool)
        if dtype == "string":
            lengths = np.frombuffer(r.take(4 * nrows), dtype="<u4").astype(np.int64)
            blob = r.take(int(lengths.sum()))
            ends = np.cumsum(lengths)
            starts = ends - lengths
            vals = np.empty(nrows, dtype=object)
            vals[:] = [blob[s:e].decode("utf-8") for s, e in zip(starts.tolist(), ends.tolist())]
            vals[nulls] = None
        elif dtype == "float64":
            vals = np.frombuffer(r.take(8 * nrows), dtype="<f8").astype(np.float64)
        else:
            vals = np.frombuffer(r.take(8 * nrows), dtype="<i8").astype(np.int64)
        cols.append(Column.build(col_name, dtype, vals, nulls=nulls))
    if r.pos != len(data):
        raise CacheFormatError(f"{path}: trailing bytes after last column")
    return ColumnTable(name, cols, nrows)


def load_table(path, schema_hint: Mapping[str, str] | None = None) -> ColumnTable:
    """Load by extension: ``.ctbl`` cache or CSV."""
    if str(path).endswith(".ctbl"):
        return read_ctbl(path)
    return load_csv(path, schema_hint)
