"""Day-number date arithmetic.

Dates are carried as int64 days since 1970-01-01 (proleptic Gregorian). The
civil conversions are Howard Hinnant's branch-free algorithms, vectorised.
"""
from __future__ import annotations

import datetime as _dt
import re

import numpy as np

ISO_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_EPOCH_ORDINAL = _dt.date(1970, 1, 1).toordinal()


def days_from_civil(year, month, day):
    """Days since the epoch for civil dates (scalars or arrays)."""
    y = np.asarray(year, dtype=np.int64) - (np.asarray(month) <= 2)
    m = np.asarray(month, dtype=np.int64)
    d = np.asarray(day, dtype=np.int64)
    era = np.floor_divide(y, 400)
    yoe = y - era * 400
    mp = (m + 9) % 12
    doy = (153 * mp + 2) // 5 + d - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    out = era * 146097 + doe - 719468
    return out if out.ndim else int(out)


def civil_from_days(days):
    """Inverse of :func:`days_from_civil`; returns ``(year, month, day)``."""
    z = np.asarray(days, dtype=np.int64) + 719468
    era = np.floor_divide(z, 146097)
    doe = z - era * 146097
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    y = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    d = doy - (153 * mp + 2) // 5 + 1
    m = np.where(mp < 10, mp + 3, mp - 9)
    y = y + (m <= 2)
    if y.ndim == 0:
        return int(y), int(m), int(d)
    return y, m, d


def to_days(value) -> int:
    """Coerce a ``date``, ISO string or day number to a day number."""
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, str):
        if not ISO_DATE_RE.match(value):
            raise ValueError(f"not a YYYY-MM-DD date: {value!r}")
        value = _dt.date.fromisoformat(value)
    if isinstance(value, _dt.datetime):
        value = value.date()
    if isinstance(value, _dt.date):
        return value.toordinal() - _EPOCH_ORDINAL
    raise TypeError(f"cannot interpret {value!r} as a date")


def to_date(days: int) -> _dt.date:
    return _dt.date.fromordinal(int(days) + _EPOCH_ORDINAL)


def to_iso(days: int) -> str:
    return to_date(days).isoformat()


def parse_iso_array(values) -> np.ndarray:
    """Parse an array of YYYY-MM-DD strings to day numbers; raises on bad input."""
    arr = np.asarray(values, dtype="U10")
    return arr.astype("datetime64[D]").astype(np.int64)


def weekday_sun0(days):
    """Day of week with 0 = Sunday .. 6 = Saturday."""
    return (np.asarray(days, dtype=np.int64) + 4) % 7


def iso_week(days):
    """ISO-8601 ``(iso_year, iso_week)`` for day numbers (arrays)."""
    d = np.asarray(days, dtype=np.int64)
    iso_dow = (d + 3) % 7 + 1  # Monday = 1
    thursday = d - iso_dow + 4
    y, _, _ = civil_from_days(thursday)
    jan1 = days_from_civil(y, np.ones_like(y), np.ones_like(y))
    week = (thursday - jan1) // 7 + 1
    return y, week
