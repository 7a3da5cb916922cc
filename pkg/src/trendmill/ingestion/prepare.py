"""Cleaning recipes for each source dataset."""
from __future__ import annotations

from pathlib import Path

from .cleaning import (
    INVALID_STATE_PATTERN,
    CleaningRule,
    clean,
    drop_columns,
    drop_matching,
    fill_null,
    map_column,
    parse_unix_timestamp,
)
from .io import load_table
from .table import ColumnTable, TableError, join_lookup

WALMART_ZERO_FILL = ("profit", "sales", "shipping_cost")
WALMART_UNUSED = ("customer_name", "order_id", "product_container", "order_priority",
                  "product_base_margin", "unit_price")
REVIEW_UNUSED = ("user_id", "source_file", "parent_asin")
INSTACART_FILES = {
    "aisles": "aisles",
    "departments": "departments",
    "products": "products",
    "orders": "orders",
    "order_products__prior": "order_products__prior",
    "order_products__train": "order_products__train",
}


def walmart_rules(table: ColumnTable) -> list[CleaningRule]:
    """Zero-fill money columns, drop rows with malformed states, drop unused columns."""
    table.require(["state"])
    rules = [fill_null([c for c in WALMART_ZERO_FILL if c in table], 0.0)] if any(
        c in table for c in WALMART_ZERO_FILL) else []
    rules.append(drop_matching("state", INVALID_STATE_PATTERN))
    unused = [c for c in WALMART_UNUSED if c in table]
    if unused:
        rules.append(drop_columns(*unused))
    return rules


def prepare_retail(table: ColumnTable) -> ColumnTable:
    return clean(table, walmart_rules(table)).renamed("retail")


def prepare_reviews(ratings: ColumnTable, asins: ColumnTable) -> ColumnTable:
    """Ratings joined to categories, missing categories taken from the source file name,
    timestamps turned into dates, the "unknown" category removed."""
    ratings.require(["parent_asin", "rating", "timestamp", "source_file"])
    asins.require(["parent_asin", "category"])
    t = join_lookup(ratings, asins, "parent_asin", how="left")
    t = t.with_column(t.column("source_file").renamed("source_category"))
    t = clean(t, [
        map_column("source_category", "file_stem"),
        map_column("category", "coalesce:source_category"),
        drop_columns(*[c for c in REVIEW_UNUSED if c in t], "source_category"),
        parse_unix_timestamp("timestamp"),
        drop_matching("category", r"(?i)^unknown$"),
    ])
    t = t.rename_columns({"timestamp": "review_date"})
    t = t.filter(~t.any_null())
    return t.select(["rating", "category", "review_date"]).renamed("reviews")


def prepare_spending(table: ColumnTable) -> ColumnTable:
    from .fixtures import SPENDING_CATEGORIES

    table.require(["Date", *SPENDING_CATEGORIES])
    if table.column("Date").dtype != "date":
        raise TableError("spending Date column must hold YYYY-MM-DD dates")
    return table.filter(~table.column("Date").nulls).renamed("spending")


def _find(directory: Path, stem: str) -> Path:
    for ext in (".ctbl", ".csv"):
        p = directory / f"{stem}{ext}"
        if p.exists():
            return p
    raise FileNotFoundError(str(directory / f"{stem}.csv"))


def load_instacart(directory) -> dict[str, ColumnTable]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(str(directory))
    return {key: load_table(_find(directory, stem)) for key, stem in INSTACART_FILES.items()}


def load_reviews(path) -> ColumnTable:
    """A directory holding raw ``ratings``/``asins`` tables, or an already clean review table."""
    path = Path(path)
    if path.is_dir():
        return prepare_reviews(load_table(_find(path, "ratings")), load_table(_find(path, "asins")))
    if not path.exists():
        raise FileNotFoundError(str(path))
    table = load_table(path)
    if "review_date" in table and table.column("review_date").dtype != "date":
        raise TableError("review_date must hold YYYY-MM-DD dates")
    table.require(["rating", "category", "review_date"])
    return table
