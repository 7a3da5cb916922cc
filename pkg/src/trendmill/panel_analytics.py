"""Spending, retail-order and review panel aggregations."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import dates
from .calendar_features import season_of
from .ingestion import ColumnTable, TableError
from .ingestion.fixtures import SPENDING_CATEGORIES
from .report import Report, group_index, grouped_fsum, ranked

RETAIL_COLUMNS = ("order_date", "state", "region", "city", "customer_age", "order_quantity",
                  "sales", "profit", "shipping_cost")
REVIEW_COLUMNS = ("rating", "category", "review_date")

# Upper bounds (inclusive) of the age buckets; anything above the last is "<last>+".
AGE_BOUNDS = (20, 40, 60)


def age_bucket_labels(bounds: Sequence[int] = AGE_BOUNDS) -> list[str]:
    labels, lo = [], 0
    for hi in bounds:
        labels.append(f"{lo}-{hi}")
        lo = hi + 1
    labels.append(f"{bounds[-1]}+")
    return labels


def age_bucket(ages, bounds: Sequence[int] = AGE_BOUNDS) -> np.ndarray:
    """Bucket index per age: ``[0, b0], [b0+1, b1], ...``, then above the last bound."""
    return np.searchsorted(np.asarray(bounds), np.asarray(ages), side="left")


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def _category_means(panel: ColumnTable, group_keys: np.ndarray):
    keys, inv = group_index(group_keys)
    means = {}
    for cat in SPENDING_CATEGORIES:
        col = panel.column(cat)
        ok = ~col.nulls
        sums = grouped_fsum(col.values[ok], inv[ok], len(keys))
        counts = np.bincount(inv[ok], minlength=len(keys))
        means[cat] = [s / c if c else None for s, c in zip(sums, counts)]
    return keys, means


def _winner_rows(keys, means) -> list[tuple]:
    rows = []
    for g, key in enumerate(keys):
        vals = [means[c][g] for c in SPENDING_CATEGORIES]
        best, winner = None, None
        for cat, v in zip(SPENDING_CATEGORIES, vals):
            if v is not None and (best is None or v > best):
                best, winner = v, cat
        rows.append((*(key if isinstance(key, tuple) else (key,)), *vals, best, winner))
    return rows


def _require_spending(panel: ColumnTable) -> None:
    panel.require(["Date", *SPENDING_CATEGORIES])
    if panel.row_count == 0:
        raise TableError("spending panel is empty")


def yearly_category_winners(panel: ColumnTable) -> Report:
    """Per year: mean of each category, the largest mean (MaxAvgPercent) and its category.

    Ties go to the category listed first.
    """
    _require_spending(panel)
    years, _, _ = dates.civil_from_days(panel["Date"])
    keys, means = _category_means(panel, years)
    cols = ("year", *(f"YearAvg{c}" for c in SPENDING_CATEGORIES), "MaxAvgPercent", "winner")
    return Report("winners", cols, _winner_rows(keys.tolist(), means), y="MaxAvgPercent")


def seasonal_category_winners(panel: ColumnTable) -> Report:
    """As :func:`yearly_category_winners`, grouped by (year, season)."""
    _require_spending(panel)
    years, months, _ = dates.civil_from_days(panel["Date"])
    seasons = np.array([season_of(m) for m in range(1, 13)])[months - 1]
    keys, means = _category_means(panel, years * 10 + seasons)
    key_pairs = [(int(k) // 10, int(k) % 10) for k in keys]
    cols = ("year", "season", *(f"SeasonAvg{c}" for c in SPENDING_CATEGORIES), "MaxAvgPercent", "winner")
    return Report("seasonal_winners", cols, _winner_rows(key_pairs, means), y="MaxAvgPercent")


def spending_by_dow(panel: ColumnTable, category: str = "AllSpending") -> Report:
    """Mean percent change per day of week (0 = Sunday); absent days have an empty mean."""
    if category not in SPENDING_CATEGORIES:
        raise ValueError(f"unknown spending category {category!r}")
    panel.require(["Date", category])
    col = panel.column(category)
    ok = ~col.nulls
    dow = dates.weekday_sun0(panel["Date"])[ok]
    vals = col.values[ok]
    rows = []
    for d in range(7):
        sel = vals[dow == d].tolist()
        rows.append((d, len(sel), _mean(sel)))
    return Report(f"spending_dow_{category}", ("dow", "rows", "mean_change"), rows)


def _retail_keys(panel: ColumnTable, by: str, age_bounds: Sequence[int]):
    if by in ("state", "region", "city"):
        return panel[by], None
    if by == "month":
        _, months, _ = dates.civil_from_days(panel["order_date"])
        return months, None
    if by == "age_group":
        return age_bucket(panel["customer_age"], age_bounds), age_bucket_labels(age_bounds)
    raise ValueError(f"unsupported grouping {by!r}")


def retail_group_totals(panel: ColumnTable, by: str = "state",
                        age_bounds: Sequence[int] = AGE_BOUNDS) -> Report:
    """Row count, total order quantity and total profit per group, by quantity descending."""
    panel.require(["order_quantity", "profit"])
    if panel.row_count == 0:
        return Report(f"retail_by_{by}", (by, "orders", "order_quantity", "profit"), [])
    raw, labels = _retail_keys(panel, by, age_bounds)
    keys, inv = group_index(raw)
    n = len(keys)
    counts = np.bincount(inv, minlength=n)
    qty = np.bincount(inv, weights=panel["order_quantity"].astype(np.float64), minlength=n)
    profit_col = panel.column("profit")
    profit = grouped_fsum(np.where(profit_col.nulls, 0.0, profit_col.values), inv, n)
    key_list = [labels[k] for k in keys.tolist()] if labels else keys.tolist()
    rows = [(k, int(c), int(q), p) for k, c, q, p in zip(key_list, counts, qty, profit)]
    return Report(f"retail_by_{by}", (by, "orders", "order_quantity", "profit"),
                  ranked(rows, by=2), y="order_quantity")


def distinct_cities_per_state(panel: ColumnTable) -> Report:
    panel.require(["state", "city"])
    seen: dict[str, set] = {}
    for s, c in zip(panel["state"].tolist(), panel["city"].tolist()):
        if s is not None and c is not None:
            seen.setdefault(s, set()).add(c)
    rows = ranked([(s, len(cs)) for s, cs in seen.items()], by=1)
    return Report("cities_per_state", ("state", "cities"), rows)


def rating_distribution(panel: ColumnTable) -> Report:
    """Count per exact rating value, highest rating first."""
    panel.require(["rating"])
    col = panel.column("rating")
    vals, counts = np.unique(col.values[~col.nulls], return_counts=True)
    rows = [(float(v), int(c)) for v, c in zip(vals[::-1], counts[::-1])]
    return Report("ratings", ("rating", "reviews"), rows)


def counts_by(panel: ColumnTable, key: str) -> Report:
    """Review counts by category (largest first) or by year/dow/month (ascending key)."""
    if key == "category":
        panel.require(["category"])
        keys, inv = group_index(panel["category"])
        counts = np.bincount(inv, minlength=len(keys))
        rows = ranked(list(zip(keys.tolist(), (int(c) for c in counts))), by=1)
        return Report("reviews_by_category", ("category", "reviews"), rows)
    panel.require(["review_date"])
    day = panel["review_date"]
    if key == "year":
        k, _, _ = dates.civil_from_days(day)
    elif key == "month":
        _, k, _ = dates.civil_from_days(day)
    elif key == "dow":
        k = dates.weekday_sun0(day)
    else:
        raise ValueError(f"unsupported key {key!r}")
    vals, counts = np.unique(np.asarray(k), return_counts=True)
    return Report(f"reviews_by_{key}", (key, "reviews"), list(zip(vals.tolist(), counts.tolist())))


def _week_span(weeks_monday: np.ndarray) -> np.ndarray:
    if weeks_monday.size == 0:
        return weeks_monday
    return np.arange(weeks_monday.min(), weeks_monday.max() + 1, 7)


def _monday(days: np.ndarray) -> np.ndarray:
    return days - (days + 3) % 7


def weekly_series(panel: ColumnTable, category_filter: str = "Gift Cards") -> Report:
    """Reviews per ISO week for one category (case-insensitive), zero-filled over the span."""
    panel.require(["category", "review_date"])
    wanted = category_filter.casefold()
    cats = panel["category"].tolist()
    mask = np.fromiter((c is not None and c.casefold() == wanted for c in cats), dtype=bool,
                       count=len(cats))
    monday = _monday(panel["review_date"][mask])
    span = _week_span(monday)
    counts = np.bincount(((monday - span[0]) // 7).astype(np.int64), minlength=span.size) if span.size else []
    iso_y, iso_w = dates.iso_week(span)
    rows = list(zip(np.asarray(iso_y).tolist(), np.asarray(iso_w).tolist(), [int(c) for c in counts]))
    return Report("giftcard_weekly", ("iso_year", "iso_week", "count"), rows)


def weekly_trend_series(trends: ColumnTable, keyword: str, date_column: str = "date") -> Report:
    """A trends keyword bucketed by ISO week (mean of the week's observations)."""
    trends.require([date_column, keyword])
    col = trends.column(keyword)
    ok = ~col.nulls
    monday = _monday(trends[date_column][ok])
    keys, inv = group_index(monday)
    sums = grouped_fsum(col.values[ok].astype(np.float64), inv, len(keys))
    counts = np.bincount(inv, minlength=len(keys))
    iso_y, iso_w = dates.iso_week(np.asarray(keys, dtype=np.int64))
    rows = [(int(a), int(b), s / c) for a, b, s, c in zip(np.asarray(iso_y).tolist(),
                                                          np.asarray(iso_w).tolist(), sums, counts)]
    return Report(f"trend_weekly_{keyword}", ("iso_year", "iso_week", "value"), rows)


def pearson_weekly(a: Report, b: Report) -> dict:
    """Pearson r between two ISO-week series over the weeks they share."""
    left = {(r[0], r[1]): float(r[2]) for r in a.rows}
    right = {(r[0], r[1]): float(r[2]) for r in b.rows}
    common = sorted(set(left) & set(right))
    x = np.array([left[k] for k in common])
    y = np.array([right[k] for k in common])
    r = None
    if len(common) >= 2:
        dx, dy = x - x.mean(), y - y.mean()
        denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
        if denom > 0:
            r = float(dx @ dy) / denom
    return {"pearson_r": r, "n_weeks": len(common)}
