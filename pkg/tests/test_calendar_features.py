import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import day_number, fourth_thursday_of_november, naive_is_holiday, zeller_dow
from trendmill import dates
from trendmill.calendar_features import (
    FEATURE_NAMES,
    HolidayCalendar,
    black_friday,
    cyclical_season,
    day_of_week,
    day_of_year,
    extract_ymd,
    feature_rows,
    featurize,
    is_holiday,
    is_weekend,
    season_of,
    thanksgiving,
)

date_st = st.dates(min_value=dt.date(1900, 1, 1), max_value=dt.date(2100, 12, 31))


@pytest.mark.parametrize("d, ymd", [
    ("2024-12-31", (2024, 12, 31)),
    ("2020-01-13", (2020, 1, 13)),
    ("2000-02-29", (2000, 2, 29)),
])
def test_extract_ymd_examples(d, ymd):
    assert extract_ymd(d) == ymd


@given(date_st)
def test_extract_ymd_matches_stdlib(d):
    assert extract_ymd(d) == (d.year, d.month, d.day)


def test_season_mapping():
    assert season_of(4) == 1
    assert season_of(12) == 4
    assert season_of(1) == 4
    assert [season_of(m) for m in range(1, 13)] == [4, 4, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4]
    assert {season_of(m) for m in range(1, 13)} == {1, 2, 3, 4}


@pytest.mark.parametrize("bad", [0, 13, -1, 2.5])
def test_season_out_of_range(bad):
    with pytest.raises(ValueError):
        season_of(bad)


def test_is_holiday_examples():
    assert is_holiday("2024-12-25", HolidayCalendar(3)) == 1
    assert is_holiday("2024-06-15", HolidayCalendar(3)) == 0
    assert is_holiday("2024-11-29", HolidayCalendar(0)) == 1


def test_new_year_window_crosses_year_boundary():
    cal = HolidayCalendar(3)
    assert is_holiday("2023-12-29", cal) == 1
    assert is_holiday("2024-12-31", cal) == 1
    assert is_holiday("2024-01-04", cal) == 1
    assert is_holiday("2024-01-05", cal) == 0


def test_thanksgiving_and_black_friday_match_reference():
    for year in range(1950, 2051):
        tg = fourth_thursday_of_november(year)
        assert thanksgiving(year) == day_number(tg)
        assert black_friday(year) == thanksgiving(year) + 1
    assert dates.to_iso(thanksgiving(2024)) == "2024-11-28"


@pytest.mark.parametrize("window", [0, 1, 3, 7, 20])
def test_holiday_flags_match_naive_scan(window):
    cal = HolidayCalendar(window)
    start = day_number(dt.date(2019, 1, 1))
    days = np.arange(start, start + 3 * 366)
    flags = feature_rows(days, cal)[:, 4]
    expect = [naive_is_holiday(dt.date(1970, 1, 1) + dt.timedelta(days=int(d)), window) for d in days]
    assert flags.astype(int).tolist() == expect


def test_holiday_window_rejects_negative():
    with pytest.raises(ValueError):
        HolidayCalendar(-1)


def test_day_of_week_examples():
    assert day_of_week("2024-12-31") == 3
    assert is_weekend(3) == 0
    assert day_of_week("2024-11-30") == 7
    assert is_weekend(7) == 1
    assert day_of_week("2024-12-29") == 1
    assert is_weekend(1) == 1


@given(date_st)
def test_day_of_week_matches_zeller(d):
    assert day_of_week(d) == zeller_dow(d.year, d.month, d.day)


def test_cyclical_season_examples():
    s, c = cyclical_season("2023-12-31")
    assert abs(s) < 1e-9 and abs(c - 1) < 1e-9
    s, _ = cyclical_season("2023-04-01")  # doy 91
    assert day_of_year("2023-04-01") == 91
    assert s == pytest.approx(math.sin(2 * math.pi * 91 / 365), abs=1e-15)
    assert s > 0.9999
    a = np.array(cyclical_season("2023-12-31"))
    b = np.array(cyclical_season("2024-01-01"))
    assert np.linalg.norm(a - b) < 0.035


def test_leap_year_day_of_year_not_renormalised():
    assert day_of_year("2024-02-29") == 60
    assert day_of_year("2024-12-31") == 366
    s, c = cyclical_season("2024-12-31")
    assert s == pytest.approx(math.sin(2 * math.pi * 366 / 365))
    assert s > 0


@given(date_st)
def test_feature_vector_invariants(d):
    row = featurize([d]).row(0)
    assert abs(row["sin_season"] ** 2 + row["cos_season"] ** 2 - 1) < 1e-9
    assert row["is_weekend"] == (1.0 if row["day_of_week"] in (1.0, 7.0) else 0.0)
    assert row["season"] == season_of(int(row["month"]))
    assert (row["year"], row["month"], row["day"]) == (d.year, d.month, d.day)


@given(date_st)
def test_consecutive_days(d):
    days = np.array([day_number(d), day_number(d) + 1])
    f = feature_rows(days, HolidayCalendar())
    assert (f[0, 5] % 7) + 1 == f[1, 5]
    a0 = math.atan2(f[0, 7], f[0, 8])
    a1 = math.atan2(f[1, 7], f[1, 8])
    gap = abs((a1 - a0 + math.pi) % (2 * math.pi) - math.pi)
    assert gap <= 2 * math.pi / 365 + 1e-9


def test_featurize_examples():
    fm = featurize(["2024-12-25"])
    row = fm.row(0)
    assert row["is_holiday"] == 1 and row["season"] == 4 and row["month"] == 12
    assert fm.values.shape == (1, 9)
    empty = featurize([])
    assert len(empty) == 0 and empty.values.shape == (0, 9)
    weekly = featurize(dates.to_days("2023-01-01") + 7 * np.arange(104))
    assert len(weekly) == 104
    assert np.all(np.abs(weekly.column("sin_season") ** 2 + weekly.column("cos_season") ** 2 - 1) < 1e-9)


def test_featurize_order_and_names():
    assert FEATURE_NAMES == ("year", "month", "day", "season", "is_holiday", "day_of_week",
                             "is_weekend", "sin_season", "cos_season")
    days = [dates.to_days("2022-03-01"), dates.to_days("2022-07-04"), dates.to_days("2022-11-25")]
    fm = featurize(days)
    for i, d in enumerate(days):
        assert fm.dates[i] == d
        assert fm.values[i, 1] == dates.civil_from_days(d)[1]


def test_featurize_requires_strictly_increasing():
    with pytest.raises(ValueError):
        featurize(["2024-01-02", "2024-01-01"])
    with pytest.raises(ValueError):
        featurize(["2024-01-01", "2024-01-01"])


def test_feature_matrix_immutable_and_tabular():
    fm = featurize(["2024-01-01", "2024-01-02"])
    with pytest.raises(ValueError):
        fm.values[0, 0] = 1
    t = fm.to_table()
    assert t.column_names == ["date", *FEATURE_NAMES]
    assert t.column("date").dtype == "date"
