"""Deterministic synthetic datasets shaped like the five retail sources.

Each generator plants known structure (seasonality, holiday bumps, skewed
ratings, invalid state cells, ...) so analyses can be checked for recovery.
Output depends only on ``(kind, seed, scale, options)``.
"""
from __future__ import annotations

import numpy as np

from .. import dates
from .table import Column, ColumnTable

FIXTURE_KINDS = ("trends", "instacart", "walmart", "spending", "amazon")

# Share of malformed state cells in the Walmart source (13,898 of 1,030,000).
WALMART_BAD_STATES = 13_898
WALMART_ROWS = 1_030_000

SPENDING_CATEGORIES = (
    "AllSpending",
    "FoodService",
    "Entertainment",
    "Merchandise",
    "Grocery",
    "Health",
    "Transport",
    "RetailIncGrocery",
    "RetailExGrocery",
)

TREND_KEYWORDS = (
    "Amazon Giftcard", "desk", "tea", "sofa", "soap", "shampoo", "camera", "smartphone",
    "vacuum", "microwave", "laptop", "Winter Coat", "Swimsuit", "Thanksgiving Turkey",
    "Easter Eggs", "coffee", "blender", "headphones", "toaster", "candles", "lamp", "rug",
    "mattress", "pillow", "towel", "umbrella", "sunscreen", "backpack", "sneakers", "jeans",
)

_KIND_SALT = {k: i + 1 for i, k in enumerate(FIXTURE_KINDS)}


def _rng(kind: str, seed: int) -> np.random.Generator:
    return np.random.default_rng([_KIND_SALT[kind], int(seed)])


def _strings(pool, idx) -> np.ndarray:
    return np.asarray(pool, dtype=object)[np.asarray(idx, dtype=np.intp)]


def generate_fixture(kind: str, seed: int = 0, scale: int = 1000, **options) -> dict[str, ColumnTable]:
    """Build the named tables for one dataset kind.

    ``scale`` is weeks for ``trends``, orders for ``instacart`` and rows for
    the others.
    """
    if kind not in FIXTURE_KINDS:
        raise ValueError(f"unknown fixture kind {kind!r}; expected one of {', '.join(FIXTURE_KINDS)}")
    if scale < 0:
        raise ValueError("scale must be >= 0")
    return _GENERATORS[kind](_rng(kind, seed), int(scale), **options)


def keyword_names(n: int) -> list[str]:
    names = list(TREND_KEYWORDS[:n])
    names += [f"keyword {i:03d}" for i in range(len(names), n)]
    return names


def _trends(rng, weeks: int, keywords: int = 12, start: str = "2023-01-01",
            holiday_window: int = 3) -> dict[str, ColumnTable]:
    from ..calendar_features import HolidayCalendar, feature_rows  # calendar_features imports ingestion

    days = dates.to_days(start) + 7 * np.arange(weeks, dtype=np.int64)
    feats = feature_rows(days, HolidayCalendar(holiday_window))
    month = feats[:, 1]
    holiday = feats[:, 4]
    angle = 2 * np.pi * (days - dates.to_days("2023-01-01")) / 365.25
    cols = [Column.build("date", "date", days)]
    for j, name in enumerate(keyword_names(keywords)):
        if name == "Amazon Giftcard":
            base = 25 + 45 * (month == 12) + 15 * (month == 11) + 20 * holiday
        else:
            level = rng.uniform(15, 60)
            amp = rng.uniform(0, 25)
            phase = rng.uniform(0, 2 * np.pi)
            bump = rng.uniform(0, 30)
            base = level + amp * np.sin(angle + phase) + bump * holiday
        noisy = base + rng.normal(0, 2.0, size=weeks)
        cols.append(Column.build(name, "int64", np.clip(np.rint(noisy), 0, 100).astype(np.int64)))
    return {"trends": ColumnTable("trends", cols, weeks)}


_DEPARTMENTS = ("produce", "dairy eggs", "snacks", "beverages", "frozen", "pantry", "bakery",
                "deli", "canned goods", "household", "meat seafood", "personal care")
_DEPT_WEIGHT = np.array([30, 17, 9, 8, 7, 6, 4, 4, 4, 4, 4, 3], dtype=float)


def _instacart(rng, orders: int, products: int = 300, aisles_per_dept: int = 3,
               users: int | None = None) -> dict[str, ColumnTable]:
    empty = orders == 0
    n_dept = 0 if empty else len(_DEPARTMENTS)
    departments = ColumnTable("departments", [
        Column.build("department_id", "int64", np.arange(1, n_dept + 1)),
        Column.build("department", "string", list(_DEPARTMENTS[:n_dept])),
    ])
    aisle_names, aisle_dept, aisle_w = [], [], []
    for d in range(n_dept):
        for k in range(aisles_per_dept):
            if d == 0 and k < 2:
                aisle_names.append(("fresh fruits", "fresh vegetables")[k])
                aisle_w.append(_DEPT_WEIGHT[d] * (0.48 if k == 0 else 0.42))
            else:
                aisle_names.append(f"{_DEPARTMENTS[d]} aisle {k + 1}")
                share = 0.10 if d == 0 else 1.0 / aisles_per_dept
                aisle_w.append(_DEPT_WEIGHT[d] * share)
            aisle_dept.append(d + 1)
    n_aisle = len(aisle_names)
    aisles = ColumnTable("aisles", [
        Column.build("aisle_id", "int64", np.arange(1, n_aisle + 1)),
        Column.build("aisle", "string", aisle_names),
    ])
    n_prod = 0 if empty else products
    prod_aisle = rng.choice(n_aisle, size=n_prod, p=np.array(aisle_w) / np.sum(aisle_w)) if n_prod else np.zeros(0, int)
    prod = ColumnTable("products", [
        Column.build("product_id", "int64", np.arange(1, n_prod + 1)),
        Column.build("product_name", "string", [f"product {i + 1:04d}" for i in range(n_prod)]),
        Column.build("aisle_id", "int64", prod_aisle + 1),
        Column.build("department_id", "int64", np.asarray(aisle_dept, dtype=np.int64)[prod_aisle] if n_prod else np.zeros(0, int)),
    ])

    n_users = users or max(1, orders // 5)
    user = np.sort(rng.integers(1, n_users + 1, size=orders))
    # order_number restarts per user; the first order of each user has no prior gap.
    first = np.ones(orders, dtype=bool)
    first[1:] = user[1:] != user[:-1]
    starts = np.flatnonzero(first)
    group_start = np.repeat(starts, np.diff(np.append(starts, orders)))
    order_number = np.arange(orders) - group_start + 1
    last = np.ones(orders, dtype=bool)
    last[:-1] = user[1:] != user[:-1]
    eval_set = np.where(last & (order_number > 1), "train", "prior")
    dow_p = np.array([0.21, 0.19, 0.12, 0.11, 0.11, 0.12, 0.14])
    dow = rng.choice(7, size=orders, p=dow_p)
    hour = np.clip(np.rint(rng.normal(13.0, 3.6, size=orders)), 0, 23).astype(np.int64)
    gap = rng.integers(1, 31, size=orders).astype(float)
    order_tbl = ColumnTable("orders", [
        Column.build("order_id", "int64", np.arange(1, orders + 1)),
        Column.build("user_id", "int64", user),
        Column.build("eval_set", "string", eval_set.astype(object)),
        Column.build("order_number", "int64", order_number),
        Column.build("order_dow", "int64", dow),
        Column.build("order_hour_of_day", "int64", hour),
        Column.build("days_since_prior_order", "float64", gap, nulls=first),
    ])

    sizes = rng.integers(1, 21, size=orders)
    line_order = np.repeat(np.arange(1, orders + 1), sizes)
    pos = (np.arange(line_order.size) - np.repeat(np.cumsum(sizes) - sizes, sizes)) + 1
    p_reorder = np.clip(0.78 - 0.02 * (pos - 1), 0.05, 1.0)
    reordered = (rng.random(line_order.size) < p_reorder).astype(np.int64)
    if n_prod:
        pop = np.asarray(aisle_w)[prod_aisle]
        pop = pop / np.bincount(prod_aisle, minlength=n_aisle)[prod_aisle]
        product = rng.choice(n_prod, size=line_order.size, p=pop / pop.sum()) + 1
    else:
        product = np.zeros(line_order.size, dtype=np.int64)
    is_train = np.repeat(eval_set == "train", sizes)

    def lines(name, keep):
        return ColumnTable(name, [
            Column.build("order_id", "int64", line_order[keep]),
            Column.build("product_id", "int64", product[keep]),
            Column.build("add_to_cart_order", "int64", pos[keep]),
            Column.build("reordered", "int64", reordered[keep]),
        ])

    return {
        "aisles": aisles,
        "departments": departments,
        "products": prod,
        "orders": order_tbl,
        "order_products__prior": lines("order_products__prior", ~is_train),
        "order_products__train": lines("order_products__train", is_train),
    }


# (state, region, city count, weight)
_STATES = (
    ("California", "West", 108, 14.0), ("Texas", "Central", 102, 12.5), ("MA", "East", 101, 9.0),
    ("New Jersey", "East", 60, 8.5), ("Florida", "South", 70, 8.0), ("New York", "East", 65, 7.0),
    ("Pennsylvania", "East", 40, 5.0), ("Ohio", "Central", 35, 4.5), ("Georgia", "South", 30, 4.0),
    ("North Carolina", "South", 28, 3.5), ("Illinois", "Central", 33, 3.5), ("Virginia", "South", 25, 3.0),
    ("Washington", "West", 24, 2.5), ("Arizona", "West", 20, 2.0), ("Michigan", "Central", 22, 2.0),
    ("Tennessee", "South", 18, 2.0), ("Colorado", "West", 15, 1.5), ("Oregon", "West", 12, 1.5),
    ("Connecticut", "East", 14, 1.5), ("Kentucky", "South", 10, 1.0),
)
_BAD_STATE_CELLS = ("Calif0rnia", "T3xas", "N3w York", "12345", "MA-01", "Flor!da", "??", "Ohio#2")
_MONTH_WEIGHT = np.array([1.6, 0.7, 0.9, 0.9, 1.0, 0.95, 1.0, 1.0, 0.95, 1.0, 1.1, 1.3])


def _walmart(rng, rows: int, bad_states: int | None = None, null_rate: float = 0.01) -> dict[str, ColumnTable]:
    if bad_states is None:
        bad_states = rows * WALMART_BAD_STATES // WALMART_ROWS
    if not 0 <= bad_states <= rows:
        raise ValueError("bad_states must lie in [0, rows]")
    names = [s[0] for s in _STATES]
    w = np.array([s[3] for s in _STATES])
    st = rng.choice(len(_STATES), size=rows, p=w / w.sum())
    city_counts = np.array([s[2] for s in _STATES])
    city_idx = (rng.random(rows) * city_counts[st]).astype(np.int64)
    # Guarantee every planted city occurs: the k-th row of a state takes city k first.
    order = np.argsort(st, kind="stable")
    st_sorted = st[order]
    first = np.searchsorted(st_sorted, np.arange(len(_STATES)))
    rank = np.arange(rows) - first[st_sorted]
    cover = rank < city_counts[st_sorted]
    city_idx[order[cover]] = rank[cover]
    city_pool, offsets = [], []
    for s in _STATES:
        offsets.append(len(city_pool))
        city_pool += [f"{s[0]} City {k + 1:03d}" for k in range(s[2])]
    city = _strings(city_pool, np.asarray(offsets)[st] + city_idx)
    state = _strings(names, st)
    region = _strings([s[1] for s in _STATES], st)
    if bad_states:
        bad_rows = rng.choice(rows, size=bad_states, replace=False)
        state[bad_rows] = _strings(_BAD_STATE_CELLS, rng.integers(0, len(_BAD_STATE_CELLS), bad_states))

    years = rng.integers(2019, 2024, size=rows)
    months = rng.choice(12, size=rows, p=_MONTH_WEIGHT / _MONTH_WEIGHT.sum()) + 1
    day = np.minimum(rng.integers(1, 29, size=rows), 28)
    order_date = dates.days_from_civil(years, months, day)
    age = rng.integers(10, 91, size=rows)
    qty = rng.integers(1, 51, size=rows)
    unit_price = np.round(rng.uniform(2, 400, size=rows), 2)
    sales = np.round(qty * unit_price * rng.uniform(0.85, 1.0, size=rows), 2)
    profit = np.round(sales * rng.uniform(-0.1, 0.3, size=rows), 2)
    ship = np.round(rng.uniform(1, 60, size=rows), 2)

    def nulls():
        return rng.random(rows) < null_rate

    table = ColumnTable("walmart", [
        Column.build("order_id", "int64", np.arange(1, rows + 1)),
        Column.build("order_date", "date", order_date),
        Column.build("customer_name", "string", _strings([f"Customer {i:04d}" for i in range(800)],
                                                           rng.integers(0, 800, rows))),
        Column.build("customer_age", "int64", age),
        Column.build("state", "string", state),
        Column.build("region", "string", region),
        Column.build("city", "string", city),
        Column.build("order_quantity", "int64", qty),
        Column.build("sales", "float64", sales, nulls=nulls()),
        Column.build("profit", "float64", profit, nulls=nulls()),
        Column.build("shipping_cost", "float64", ship, nulls=nulls()),
        Column.build("unit_price", "float64", unit_price),
        Column.build("order_priority", "string", _strings(("Low", "Medium", "High", "Critical"),
                                                            rng.integers(0, 4, rows))),
        Column.build("product_container", "string", _strings(("Small Box", "Large Box", "Wrap Bag", "Jumbo Drum"),
                                                               rng.integers(0, 4, rows))),
        Column.build("product_base_margin", "float64", np.round(rng.uniform(0.3, 0.8, rows), 2)),
    ])
    return {"walmart": table}


# Year -> category that dominates that year's average percent change.
_SPENDING_LEADERS = {2020: "Grocery", 2021: "Health", 2022: "Entertainment", 2023: "Health",
                     2024: "FoodService", 2025: "Merchandise"}


def _spending(rng, rows: int, states: int = 50, start: str = "2020-01-13",
              sunday_lift: float = 2.0) -> dict[str, ColumnTable]:
    codes = 100 * np.arange(1, states + 1) + 800
    i = np.arange(rows)
    day = dates.to_days(start) + i // states
    code = codes[i % states]
    year, _, _ = dates.civil_from_days(day)
    sunday = dates.weekday_sun0(day) == 0
    cols = [Column.build("StateCode", "int64", code), Column.build("Date", "date", day)]
    for cat in SPENDING_CATEGORIES:
        lead = np.array([_SPENDING_LEADERS.get(int(y)) == cat for y in np.unique(year)])
        lead_by_row = lead[np.searchsorted(np.unique(year), year)] if rows else np.zeros(0, bool)
        base = rng.uniform(-3.0, 1.0) + 6.0 * lead_by_row + sunday_lift * sunday
        vals = np.round(base + rng.normal(0, 1.5, size=rows), 4)
        cols.append(Column.build(cat, "float64", vals))
    return {"spending": ColumnTable("spending", cols, rows)}


_REVIEW_CATEGORIES = ("Clothing Shoes and Jewelry", "Electronics", "Home and Kitchen", "Books",
                      "Health and Household", "Gift Cards", "unknown")
_REVIEW_CAT_WEIGHT = np.array([30, 24, 16, 12, 8, 6, 4], dtype=float)
_REVIEW_DOW_WEIGHT = np.array([0.7, 1.0, 1.45, 1.5, 1.4, 1.0, 0.7])  # Sunday first
_REVIEW_MONTH_WEIGHT = np.array([2.0, 1.0, 0.9, 0.9, 0.9, 0.9, 0.95, 0.95, 0.9, 1.0, 2.0, 2.4])


def _review_day_weights(days: np.ndarray, gift: bool) -> np.ndarray:
    y, m, _ = dates.civil_from_days(days)
    yw = 1.0 + 0.15 * (y - y.min())
    w = yw * _REVIEW_MONTH_WEIGHT[m - 1] * _REVIEW_DOW_WEIGHT[dates.weekday_sun0(days)]
    if gift:
        _, wk = dates.iso_week(days)
        w = np.where(np.isin(wk, (51, 52, 1, 2)), w * 8.0, w)
    return w / w.sum()


def _amazon(rng, rows: int, five_star_fraction: float = 0.5, first_year: int = 2018,
            last_year: int = 2024, asins: int = 2000, orphan_rate: float = 0.05) -> dict[str, ColumnTable]:
    n5 = int(rows * five_star_fraction)
    rating = np.concatenate([np.full(n5, 5.0), rng.choice([1.0, 2.0, 3.0, 4.0], size=rows - n5,
                                                           p=[0.2, 0.15, 0.25, 0.4])])
    rating = rating[rng.permutation(rows)]
    asin_cat = rng.choice(len(_REVIEW_CATEGORIES), size=asins, p=_REVIEW_CAT_WEIGHT / _REVIEW_CAT_WEIGHT.sum())
    asin_ids = [f"B{i:08d}" for i in range(asins)]
    pick = rng.integers(0, asins, size=rows)
    cat = asin_cat[pick]
    # Some reviews point at products missing from the mapping table.
    orphan = rng.random(rows) < orphan_rate
    parent = _strings(asin_ids, pick)
    parent[orphan] = _strings([f"X{i:08d}" for i in range(asins)], pick[orphan])

    span = np.arange(dates.days_from_civil(first_year, 1, 1), dates.days_from_civil(last_year, 12, 31) + 1)
    day = np.empty(rows, dtype=np.int64)
    gift = np.asarray(_REVIEW_CATEGORIES)[cat] == "Gift Cards"
    for flag in (False, True):
        sel = gift == flag
        if sel.any():
            day[sel] = rng.choice(span, size=int(sel.sum()), p=_review_day_weights(span, flag))
    seconds = day * 86_400 + rng.integers(0, 86_400, size=rows)
    millis = rng.random(rows) < 0.5
    ts = np.where(millis, seconds * 1000 + rng.integers(0, 1000, size=rows), seconds)
    source = _strings([c.replace(" ", "_") + ".csv" for c in _REVIEW_CATEGORIES], cat)
    ratings = ColumnTable("ratings", [
        Column.build("user_id", "string", _strings([f"U{i:06d}" for i in range(5000)], rng.integers(0, 5000, rows))),
        Column.build("parent_asin", "string", parent),
        Column.build("rating", "float64", rating),
        Column.build("timestamp", "int64", ts),
        Column.build("source_file", "string", source),
    ])
    asin_tbl = ColumnTable("asins", [
        Column.build("parent_asin", "string", asin_ids if rows else []),
        Column.build("category", "string", list(_strings(_REVIEW_CATEGORIES, asin_cat)) if rows else []),
    ])
    return {"ratings": ratings, "asins": asin_tbl}


_GENERATORS = {
    "trends": _trends,
    "instacart": _instacart,
    "walmart": _walmart,
    "spending": _spending,
    "amazon": _amazon,
}
