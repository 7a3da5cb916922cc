"""Per-keyword trend forecasting: one independent tree per search keyword."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import dates
from .calendar_features import HolidayCalendar, feature_rows, featurize
from .ingestion import ColumnTable, TableError
from .regression_tree import SplitSpec, TreeParams, fit, rmse, split_indices
from .report import Report

log = logging.getLogger(__name__)

DEFAULT_TARGET_DATE = "2024-12-31"
RMSE_MAX = 3.0
PRED_MIN = 80.0
TREND_MIN, TREND_MAX = 0.0, 100.0


class ForecastError(ValueError):
    def __init__(self, keyword: str, message: str):
        super().__init__(f"keyword {keyword!r}: {message}")
        self.keyword = keyword


@dataclass(frozen=True)
class KeywordForecast:
    keyword: str
    rmse: float
    prediction_at_target: float
    target_date: int  # day number
    n_train: int = 0
    n_test: int = 0


@dataclass(frozen=True)
class ForecastSummary:
    min: float
    max: float
    mean: float
    variance: float
    count: int
    selected: tuple[str, ...] = ()
    failed: dict = field(default_factory=dict)


def _date_column(trends: ColumnTable) -> str:
    for c in trends.columns:
        if c.dtype == "date":
            return c.name
    raise TableError("trends table has no date column")


def keyword_columns(trends: ColumnTable) -> list[str]:
    return [c.name for c in trends.columns if c.dtype in ("int64", "float64")]


def forecast_keyword(keyword: str, features: np.ndarray, values, null_mask, target_row: np.ndarray,
                     target_day: int, params: TreeParams, spec: SplitSpec) -> KeywordForecast:
    """Split, fit, score on the held-out rows and predict the target date for one keyword."""
    keep = ~np.asarray(null_mask, dtype=bool)
    y = np.asarray(values, dtype=np.float64)[keep]
    X = features[keep]
    if y.size < 2:
        raise ForecastError(keyword, f"needs at least 2 non-null rows, has {y.size}")
    if not np.isfinite(y).all() or (y < TREND_MIN).any() or (y > TREND_MAX).any():
        raise ForecastError(keyword, "trend values must lie in [0, 100]")
    train, test = split_indices(y.size, spec)
    tree = fit(X[train], y[train], params)
    err = rmse(y[test], tree.predict(X[test]))
    pred = tree.predict_one(target_row)
    return KeywordForecast(keyword, err, pred, target_day, int(train.size), int(test.size))


def run_trend_pipeline(trends: ColumnTable, cal: HolidayCalendar = HolidayCalendar(),
                       params: TreeParams = TreeParams(), spec: SplitSpec = SplitSpec(),
                       target_date=DEFAULT_TARGET_DATE, jobs: int = 1,
                       on_error: str = "raise", rmse_max: float = RMSE_MAX,
                       pred_min: float = PRED_MIN) -> tuple[list[KeywordForecast], ForecastSummary]:
    """Train and evaluate one tree per keyword column; results sorted by keyword.

    With ``on_error="collect"`` a failing keyword is recorded in
    ``summary.failed`` instead of aborting the run.
    """
    if on_error not in ("raise", "collect"):
        raise ValueError("on_error must be 'raise' or 'collect'")
    date_col = _date_column(trends)
    keywords = keyword_columns(trends)
    if not keywords:
        raise TableError("trends table has no numeric keyword columns")
    if trends.column(date_col).null_count:
        raise TableError("trends date column contains nulls")
    fm = featurize(trends[date_col], cal)
    target_day = dates.to_days(target_date)
    target_row = feature_rows(np.array([target_day]), cal)[0]

    def one(kw: str):
        col = trends.column(kw)
        try:
            return forecast_keyword(kw, fm.values, col.values, col.nulls, target_row, target_day,
                                    params, spec)
        except ForecastError as exc:
            if on_error == "raise":
                raise
            log.warning("%s", exc)
            return exc

    if jobs > 1 and len(keywords) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, keywords))
    else:
        results = [one(kw) for kw in keywords]

    forecasts = sorted((r for r in results if isinstance(r, KeywordForecast)), key=lambda f: f.keyword)
    failed = {r.keyword: str(r) for r in results if isinstance(r, ForecastError)}
    if not forecasts:
        raise ForecastError(",".join(sorted(failed)), "every keyword failed")
    summary = summarize_rmse(forecasts)
    summary = ForecastSummary(summary.min, summary.max, summary.mean, summary.variance, summary.count,
                              tuple(select_keywords(forecasts, rmse_max, pred_min)),
                              dict(sorted(failed.items())))
    return forecasts, summary


def select_keywords(forecasts: Sequence[KeywordForecast], rmse_max: float = RMSE_MAX,
                    pred_min: float = PRED_MIN) -> list[str]:
    """Keywords with rmse < rmse_max and prediction > pred_min, in input order."""
    return [f.keyword for f in forecasts if f.rmse < rmse_max and f.prediction_at_target > pred_min]


def summarize_rmse(forecasts: Sequence[KeywordForecast]) -> ForecastSummary:
    """Min, max, mean and population variance of the per-keyword RMSEs."""
    if not forecasts:
        raise ValueError("cannot summarise an empty forecast list")
    vals = [f.rmse for f in forecasts]
    n = len(vals)
    lo, hi = min(vals), max(vals)
    # the division can round just outside [lo, hi]; the exact mean never is
    mean = min(max(math.fsum(vals) / n, lo), hi)
    var = math.fsum((v - mean) ** 2 for v in vals) / n
    return ForecastSummary(lo, hi, mean, var, n)


def prediction_histogram(forecasts: Sequence[KeywordForecast], bin_width: float = 10.0) -> Report:
    """Counts of target-date predictions in ``[k*w, (k+1)*w)`` bins, gaps filled with 0."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    cols = ("bin_start", "bin_end", "count")
    if not forecasts:
        return Report("histogram", cols, [], x="bin_start", y="count")
    k = np.floor(np.array([f.prediction_at_target for f in forecasts]) / bin_width).astype(np.int64)
    lo, hi = int(k.min()), int(k.max())
    counts = np.bincount(k - lo, minlength=hi - lo + 1)
    rows = [((lo + i) * bin_width, (lo + i + 1) * bin_width, int(c)) for i, c in enumerate(counts)]
    return Report("histogram", cols, rows, x="bin_start", y="count")


def forecasts_report(forecasts: Sequence[KeywordForecast]) -> Report:
    return Report("forecasts", ("keyword", "rmse", "prediction"),
                  [(f.keyword, f.rmse, f.prediction_at_target) for f in forecasts])
