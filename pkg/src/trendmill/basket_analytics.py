"""Order-basket analytics over the denormalised Instacart-style table."""
from __future__ import annotations

import numpy as np

from .ingestion import ColumnTable, TableError, clean, fill_null, join_lookup
from .report import Report, group_index, ranked

BASKET_COLUMNS = (
    "order_dow",
    "order_hour_of_day",
    "days_since_prior_order",
    "product_name",
    "aisle",
    "department",
    "add_to_cart_order",
    "reordered",
)

INSTACART_TABLES = ("aisles", "departments", "products", "orders", "order_products__prior",
                    "order_products__train")

NO_PRIOR_ORDER = -1


def denormalize(aisles: ColumnTable, departments: ColumnTable, products: ColumnTable,
                orders: ColumnTable, order_products_prior: ColumnTable,
                order_products_train: ColumnTable, keep_order_id: bool = False) -> ColumnTable:
    """Join the six normalised tables into one analysis table.

    Products are inner-joined to aisles and departments; order lines
    (prior then train) are left-joined to orders and product details, and
    rows left with any null are dropped. Ids and ``eval_set`` do not survive.
    """
    aisles.require(["aisle_id", "aisle"])
    departments.require(["department_id", "department"])
    products.require(["product_id", "aisle_id", "department_id"])
    orders.require(["order_id", "days_since_prior_order"])
    for t in (order_products_prior, order_products_train):
        t.require(["order_id", "product_id"])

    details = join_lookup(products, aisles, "aisle_id", how="inner")
    details = join_lookup(details, departments, "department_id", how="inner")
    details = details.drop(["aisle_id", "department_id"])

    cols = order_products_prior.column_names
    lines = order_products_prior.concat(order_products_train.select(cols), name="order_lines")

    gap = orders.column("days_since_prior_order")
    fill = float(NO_PRIOR_ORDER) if gap.dtype == "float64" else NO_PRIOR_ORDER
    filled = clean(orders, [fill_null("days_since_prior_order", fill)])
    filled = filled.drop([c for c in ("eval_set", "user_id") if c in filled])

    wide = join_lookup(lines, filled, "order_id", how="left")
    wide = join_lookup(wide, details, "product_id", how="left")
    wide = wide.filter(~wide.any_null())
    keep = list(BASKET_COLUMNS) + (["order_id"] if keep_order_id else [])
    return wide.select(keep).renamed("basket")


def validate_basket(basket: ColumnTable) -> None:
    basket.require(list(BASKET_COLUMNS))
    if basket.any_null().any():
        raise TableError("basket contains nulls")
    hour = basket["order_hour_of_day"]
    dow = basket["order_dow"]
    if ((hour < 0) | (hour > 23)).any():
        raise TableError("order_hour_of_day outside 0-23")
    if ((dow < 0) | (dow > 6)).any():
        raise TableError("order_dow outside 0-6")
    if not np.isin(basket["reordered"], (0, 1)).all():
        raise TableError("reordered must be 0 or 1")


def _bucket_counts(values: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(np.asarray(values, dtype=np.int64), minlength=size)[:size]


def orders_per_hour(basket: ColumnTable, distinct_orders: bool = False) -> Report:
    """Order-line count (or distinct order count) for each hour 0-23."""
    hour = basket["order_hour_of_day"]
    if distinct_orders:
        if "order_id" not in basket:
            raise TableError("distinct order counting needs the order_id column (keep_order_id=True)")
        pairs = np.unique(np.stack([basket["order_id"], hour], axis=1), axis=0) if len(hour) else np.zeros((0, 2), int)
        hour = pairs[:, 1]
    counts = _bucket_counts(hour, 24)
    return Report("hourly", ("hour", "orders"), [(h, int(c)) for h, c in enumerate(counts)])


def orders_per_dow(basket: ColumnTable, reordered_only: bool = False) -> Report:
    """Counts per day of week, 0 = Sunday."""
    dow = basket["order_dow"]
    if reordered_only:
        dow = dow[basket["reordered"] == 1]
    counts = _bucket_counts(dow, 7)
    name = "dow_reordered" if reordered_only else "dow"
    return Report(name, ("dow", "orders"), [(d, int(c)) for d, c in enumerate(counts)])


def category_shares(basket: ColumnTable, by: str = "department", top_k: int | None = None) -> Report:
    """Row count and percentage of all rows per department or aisle, largest first.

    ``top_k`` truncates the listing; shares stay relative to the full total.
    """
    if by not in ("department", "aisle"):
        raise ValueError(f"by must be 'department' or 'aisle', not {by!r}")
    total = basket.row_count
    if total == 0:
        raise TableError("category shares of an empty basket are undefined")
    keys, inv = group_index(basket[by])
    counts = np.bincount(inv, minlength=len(keys))
    rows = ranked([(k, int(c), 100.0 * int(c) / total) for k, c in zip(keys.tolist(), counts)], by=1)
    if top_k is not None:
        rows = rows[:top_k]
    return Report(f"{by}_shares", (by, "count", "share"), rows, y="share")


def reorder_rate_by_position(basket: ColumnTable, max_position: int = 50) -> Report:
    """Reordered items / all items at each cart position present up to ``max_position``."""
    pos = basket["add_to_cart_order"]
    re = basket["reordered"]
    keep = (pos >= 1) & (pos <= max_position)
    items = np.bincount(pos[keep], minlength=max_position + 1)
    reordered = np.bincount(pos[keep], weights=re[keep], minlength=max_position + 1)
    rows = [(p, int(items[p]), int(reordered[p]), int(reordered[p]) / int(items[p]))
            for p in range(1, max_position + 1) if items[p] > 0]
    return Report("reorder_by_position", ("position", "items", "reordered", "reorder_rate"), rows,
                  y="reorder_rate")
