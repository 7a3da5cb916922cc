"""Calendar features derived from a date: the nine model inputs for trend forecasting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import dates
from .ingestion.table import Column, ColumnTable

FEATURE_NAMES = (
    "year",
    "month",
    "day",
    "season",
    "is_holiday",
    "day_of_week",
    "is_weekend",
    "sin_season",
    "cos_season",
)

# Meteorological seasons: 1 spring (Mar-May), 2 summer, 3 fall, 4 winter (Dec-Feb).
_SEASON_BY_MONTH = np.array([0, 4, 4, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4], dtype=np.int64)

DAYS_PER_CYCLE = 365


@dataclass(frozen=True)
class HolidayCalendar:
    """Christmas, New Year, Valentine's Day, Thanksgiving and Black Friday.

    A date counts as a holiday when it lies within ``window_days`` of any of
    them, including across a year boundary.
    """

    window_days: int = 3
    fixed: tuple[tuple[int, int], ...] = ((12, 25), (1, 1), (2, 14))

    def __post_init__(self):
        if int(self.window_days) != self.window_days or self.window_days < 0:
            raise ValueError(f"window_days must be a non-negative integer, got {self.window_days!r}")

    def holidays(self, year: int) -> list[int]:
        """Day numbers of every holiday in ``year``, ascending."""
        days = [dates.days_from_civil(year, m, d) for m, d in self.fixed]
        tg = thanksgiving(year)
        days += [tg, tg + 1]
        return sorted(days)

    def holiday_days(self, first_year: int, last_year: int) -> np.ndarray:
        out = []
        for y in range(first_year, last_year + 1):
            out.extend(self.holidays(y))
        return np.array(sorted(out), dtype=np.int64)


def thanksgiving(year: int) -> int:
    """Fourth Thursday of November, as a day number."""
    nov1 = dates.days_from_civil(year, 11, 1)
    weekday = (nov1 + 3) % 7  # Monday = 0
    return nov1 + (3 - weekday) % 7 + 21


def black_friday(year: int) -> int:
    return thanksgiving(year) + 1


def extract_ymd(date) -> tuple[int, int, int]:
    return dates.civil_from_days(dates.to_days(date))


def season_of(month: int) -> int:
    if not 1 <= int(month) <= 12 or int(month) != month:
        raise ValueError(f"month out of range: {month!r}")
    return int(_SEASON_BY_MONTH[int(month)])


def day_of_week(date) -> int:
    """1 = Sunday ... 7 = Saturday."""
    return int(_dow(np.int64(dates.to_days(date))))


def is_weekend(dow: int) -> int:
    return int(dow in (1, 7))


def day_of_year(date) -> int:
    d = dates.to_days(date)
    y, _, _ = dates.civil_from_days(d)
    return d - dates.days_from_civil(y, 1, 1) + 1


def cyclical_season(date) -> tuple[float, float]:
    angle = 2.0 * math.pi * day_of_year(date) / DAYS_PER_CYCLE
    return math.sin(angle), math.cos(angle)


def is_holiday(date, cal: HolidayCalendar = HolidayCalendar()) -> int:
    return int(_holiday_flags(np.array([dates.to_days(date)], dtype=np.int64), cal)[0])


def _dow(days):
    return (days + 4) % 7 + 1


def _holiday_flags(days: np.ndarray, cal: HolidayCalendar) -> np.ndarray:
    if days.size == 0:
        return np.zeros(0, dtype=np.int64)
    years, _, _ = dates.civil_from_days(days)
    # Pad by enough years that any window reaching across a boundary is covered.
    pad = 1 + cal.window_days // 365
    hol = cal.holiday_days(int(years.min()) - pad, int(years.max()) + pad)
    pos = np.searchsorted(hol, days)
    after = hol[np.minimum(pos, hol.size - 1)]
    before = hol[np.maximum(pos - 1, 0)]
    gap = np.minimum(np.abs(after - days), np.abs(days - before))
    return (gap <= cal.window_days).astype(np.int64)


def feature_rows(days: np.ndarray, cal: HolidayCalendar) -> np.ndarray:
    """Vectorised featurisation: an ``(n, 9)`` float64 array in FEATURE_NAMES order."""
    days = np.asarray(days, dtype=np.int64)
    y, m, d = dates.civil_from_days(days)
    doy = days - dates.days_from_civil(y, np.ones_like(y), np.ones_like(y)) + 1
    dow = _dow(days)
    angle = 2.0 * np.pi * doy / DAYS_PER_CYCLE
    out = np.empty((days.size, len(FEATURE_NAMES)), dtype=np.float64)
    out[:, 0] = y
    out[:, 1] = m
    out[:, 2] = d
    out[:, 3] = _SEASON_BY_MONTH[m]
    out[:, 4] = _holiday_flags(days, cal)
    out[:, 5] = dow
    out[:, 6] = (dow == 1) | (dow == 7)
    out[:, 7] = np.sin(angle)
    out[:, 8] = np.cos(angle)
    return out


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    dates: np.ndarray
    values: np.ndarray

    names = FEATURE_NAMES

    def __len__(self) -> int:
        return self.dates.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, FEATURE_NAMES.index(name)]

    def row(self, i: int) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values[i].tolist()))

    def to_table(self, name: str = "features") -> ColumnTable:
        cols = [Column.build("date", "date", self.dates)]
        cols += [Column.build(n, "float64", self.values[:, j]) for j, n in enumerate(FEATURE_NAMES)]
        return ColumnTable(name, cols)


def featurize(date_list: Sequence, cal: HolidayCalendar = HolidayCalendar()) -> FeatureMatrix:
    """One feature row per date; dates must be strictly increasing."""
    if isinstance(date_list, np.ndarray) and date_list.dtype.kind == "i":
        days = date_list.astype(np.int64)
    else:
        days = np.array([dates.to_days(v) for v in date_list], dtype=np.int64)
    if days.size > 1 and not (np.diff(days) > 0).all():
        raise ValueError("dates must be strictly increasing")
    vals = feature_rows(days, cal)
    days = days.copy()
    days.flags.writeable = False
    vals.flags.writeable = False
    return FeatureMatrix(days, vals)
