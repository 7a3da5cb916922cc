"""Acceptance gate: one test per criterion, each reported as a PASS/FAIL line in the summary."""
import datetime as dt
import math
import time
from fractions import Fraction

import numpy as np

from oracles import brute_force_root_split, day_number, naive_rmse, spearman, zeller_dow
from test_basket_analytics import basket
from trendmill import dates
from trendmill.basket_analytics import (
    category_shares,
    denormalize,
    orders_per_dow,
    orders_per_hour,
    reorder_rate_by_position,
)
from trendmill.calendar_features import HolidayCalendar, feature_rows
from trendmill.cli import main
from trendmill.ingestion import Column, ColumnTable, generate_fixture, prepare_retail
from trendmill.ingestion.fixtures import SPENDING_CATEGORIES
from trendmill.panel_analytics import (
    counts_by,
    distinct_cities_per_state,
    rating_distribution,
    retail_group_totals,
    seasonal_category_winners,
    spending_by_dow,
    weekly_series,
    yearly_category_winners,
)
from trendmill.regression_tree import TreeParams, fit, rmse
from trendmill.trend_forecast import run_trend_pipeline

WEEKS = dates.to_days("2023-01-01") + 7 * np.arange(104)


# -- 1 ------------------------------------------------------------------------

def test_criterion_1_tree_split_oracle(record_property):
    record_property("criterion", "1 tree-split oracle, 1000 datasets, <10 s")
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    agree = 0
    for i in range(1000):
        n, p = int(rng.integers(1, 13)), int(rng.integers(1, 3))
        X = rng.integers(-3, 4, size=(n, p)).astype(float)
        y = rng.integers(0, 5, size=n).astype(float) if i % 2 else np.round(rng.normal(0, 10, n), 3)
        tree = fit(X, y, TreeParams(max_depth=1))
        ref = None if np.all(y == y[0]) else brute_force_root_split(X.tolist(), y.tolist())
        if ref is None:
            agree += tree.node_count == 1
        else:
            agree += (int(tree.feature[0]), float(tree.threshold[0])) == ref[:2]
    elapsed = time.perf_counter() - start
    assert agree == 1000
    assert elapsed < 10.0


# -- 2 ------------------------------------------------------------------------

def test_criterion_2_rmse_oracle(record_property):
    record_property("criterion", "2 rmse vs naive oracle to 1e-12")
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        scale = 10.0 ** rng.integers(-3, 4)
        y, yhat = rng.normal(0, scale, n), rng.normal(0, scale, n)
        ref = naive_rmse(y.tolist(), yhat.tolist())
        assert abs(rmse(y, yhat) - ref) <= 1e-12 * max(1.0, ref)


# -- 3 ------------------------------------------------------------------------

def test_criterion_3_feature_identities(record_property):
    record_property("criterion", "3 calendar identities 1990-2030")
    first, last = day_number(dt.date(1990, 1, 1)), day_number(dt.date(2030, 12, 31))
    days = np.arange(first, last + 1)
    f = feature_rows(days, HolidayCalendar())
    sin, cos = f[:, 7], f[:, 8]
    assert np.all(np.abs(sin**2 + cos**2 - 1) <= 1e-9)
    for d, (y, m, dd, dow) in zip(days.tolist(), f[:, [0, 1, 2, 5]].astype(int).tolist()):
        assert dt.date(y, m, dd) == dt.date(1970, 1, 1) + dt.timedelta(days=d)
        assert dow == zeller_dow(y, m, dd)
    gap = np.hypot(np.diff(sin), np.diff(cos))
    # chord length is at most the arc length
    assert np.all(gap <= 2 * math.pi / 365 + 1e-9)


# -- 4 ------------------------------------------------------------------------

def test_criterion_4_planted_signal(record_property):
    record_property("criterion", "4 planted holiday signal, sigma 1, seed 1234")
    hol = feature_rows(WEEKS, HolidayCalendar())[:, 4]
    noise = np.random.default_rng(4).normal(0, 1, WEEKS.size)
    y = np.clip(np.where(hol == 1, 100.0, 10.0) + noise, 0, 100)
    t = ColumnTable("trends", [Column.build("date", "date", WEEKS), Column.build("planted", "float64", y)])
    runs = [run_trend_pipeline(t, target_date="2024-12-25") for _ in range(2)]
    assert runs[0] == runs[1]
    fc = runs[0][0][0]
    assert fc.rmse < 2.0
    assert fc.prediction_at_target >= 90


# -- 5 ------------------------------------------------------------------------

SEVEN = {"soap": 84.0, "shampoo": 92.43, "camera": 92.0, "smartphone": 92.9,
         "vacuum": 91.0, "microwave": 90.9, "laptop": 90.1}


def test_criterion_5_selection_rule(record_property):
    record_property("criterion", "5 exactly the seven keywords selected")
    hol = feature_rows(WEEKS, HolidayCalendar())[:, 4] == 1
    rng = np.random.default_rng(5)
    cols = [Column.build("date", "date", WEEKS)]
    for name, peak in SEVEN.items():
        cols.append(Column.build(name, "float64", np.where(hol, peak, 20.0) + rng.normal(0, 0.3, WEEKS.size)))
    # decoys: two low flat series, two very noisy ones
    for name, level, sigma in (("Winter Coat", 10.0, 1.0), ("Swimsuit", 16.0, 1.0),
                               ("Thanksgiving Turkey", 65.0, 20.0), ("Easter Eggs", 6.0, 20.0)):
        cols.append(Column.build(name, "float64", np.clip(level + rng.normal(0, sigma, WEEKS.size), 0, 100)))
    fcs, summary = run_trend_pipeline(ColumnTable("trends", cols))
    assert set(summary.selected) == set(SEVEN)
    assert len(summary.selected) == 7


# -- 6 ------------------------------------------------------------------------

def test_criterion_6_cleaning_and_join_fidelity(record_property):
    record_property("criterion", "6 walmart 1,030,000 -> 1,016,102; one dangling key drops one row")
    raw = generate_fixture("walmart", seed=11, scale=1_030_000)["walmart"]
    assert raw.row_count == 1_030_000
    assert prepare_retail(raw).row_count == 1_016_102

    t = generate_fixture("instacart", seed=6, scale=500)
    prior = t["order_products__prior"]
    pid = prior["product_id"].copy()
    pid[17] = 10**9
    broken = prior.with_column(Column.build("product_id", "int64", pid))
    args = [t["aisles"], t["departments"], t["products"], t["orders"]]
    full = denormalize(*args, prior, t["order_products__train"]).row_count
    assert full == prior.row_count + t["order_products__train"].row_count
    assert denormalize(*args, broken, t["order_products__train"]).row_count == full - 1


# -- 7 ------------------------------------------------------------------------

def _family_reports(b, spend, retail, reviews):
    out = [orders_per_hour(b), orders_per_dow(b), orders_per_dow(b, True), category_shares(b, "department"),
           category_shares(b, "aisle", top_k=25), reorder_rate_by_position(b),
           yearly_category_winners(spend), seasonal_category_winners(spend)]
    out += [spending_by_dow(spend, c) for c in SPENDING_CATEGORIES]
    out += [retail_group_totals(retail, by) for by in ("state", "region", "city", "month", "age_group")]
    out += [distinct_cities_per_state(retail), rating_distribution(reviews), weekly_series(reviews)]
    out += [counts_by(reviews, k) for k in ("category", "year", "dow", "month")]
    return out


def test_criterion_7_conservation_and_permutation(record_property, basket_small, spending_small,
                                                  retail_small, reviews_small):
    record_property("criterion", "7 conservation and permutation byte-identity")
    b, s, r, v = basket_small, spending_small, retail_small, reviews_small
    nb, nr, nv = b.row_count, r.row_count, v.row_count
    assert sum(orders_per_hour(b).column("orders")) == nb
    assert sum(orders_per_dow(b).column("orders")) == nb
    for by in ("department", "aisle"):
        shares = category_shares(b, by)
        assert sum(shares.column("count")) == nb
        assert abs(sum(shares.column("share")) - 100) <= 1e-6
    assert sum(reorder_rate_by_position(b, max_position=10**6).column("items")) == nb
    for by in ("state", "region", "city", "month", "age_group"):
        assert sum(retail_group_totals(r, by).column("orders")) == nr
    for key in ("category", "year", "dow", "month"):
        assert sum(counts_by(v, key).column("reviews")) == nv
    assert sum(rating_distribution(v).column("reviews")) == nv
    gift = sum(1 for c in v["category"].tolist() if c.lower() == "gift cards")
    assert sum(weekly_series(v).column("count")) == gift

    rng = np.random.default_rng(77)
    shuffled = [t.take(rng.permutation(t.row_count)) for t in (b, s, r, v)]
    for a, c in zip(_family_reports(b, s, r, v), _family_reports(*shuffled)):
        assert a.to_csv() == c.to_csv()
        assert a.plot_csv() == c.plot_csv()


# -- 8 ------------------------------------------------------------------------

def test_criterion_8_reorder_rate(record_property, basket_small):
    record_property("criterion", "8 reorder-rate formula and decay correlation")
    pos = [1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 5, 7]
    re_ = [1, 1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 1, 0, 1]
    hand = {1: Fraction(5, 6), 2: Fraction(3, 5), 3: Fraction(1, 4), 4: Fraction(1, 3),
            5: Fraction(0), 7: Fraction(1)}
    r = reorder_rate_by_position(basket(add_to_cart_order=pos, reordered=re_))
    got = r.mapping("position", "reorder_rate")
    assert set(got) == set(hand)
    for p, rate in hand.items():
        assert abs(got[p] - float(rate)) <= 1e-12
    rows = [row for row in reorder_rate_by_position(basket_small).rows if row[1] >= 30]
    assert spearman([row[0] for row in rows], [row[3] for row in rows]) < -0.9


# -- 9 ------------------------------------------------------------------------

def _tree(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_9_end_to_end_determinism(record_property, tmp_path):
    record_property("criterion", "9 byte-identical CLI outputs at laptop scale")
    start = time.perf_counter()
    data = tmp_path / "data"
    for kind, scale, extra in (("trends", 104, ["--keywords", "162"]), ("instacart", 10_000, []),
                               ("spending", 100_000, []), ("walmart", 100_000, []), ("amazon", 100_000, [])):
        assert main(["fixture", kind, "--seed", "9", "--scale", str(scale), "--out", str(data / kind), *extra]) == 0
    inputs = ["--trends", str(data / "trends" / "trends.csv"), "--instacart", str(data / "instacart"),
              "--spending", str(data / "spending" / "spending.csv"),
              "--retail", str(data / "walmart" / "walmart.csv"), "--reviews", str(data / "amazon")]
    commands = [["forecast", "--select"]] + [["analyze", f] for f in ("basket", "spending", "retail",
                                                                        "reviews", "collab")]
    for run in ("a", "b"):
        for cmd in commands:
            assert main([*cmd, *inputs, "--out", str(tmp_path / run)]) == 0
    first = _tree(tmp_path / "a")
    assert len(first) > 30
    assert first == _tree(tmp_path / "b")
    assert (tmp_path / "a" / "forecasts.csv").read_text().count("\n") == 163
    assert time.perf_counter() - start < 60.0
