"""Command-line entry point.

Exit codes: 0 success, 1 data or processing error, 2 usage error or missing input.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import dates
from .basket_analytics import (
    category_shares,
    denormalize,
    orders_per_dow,
    orders_per_hour,
    reorder_rate_by_position,
)
from .calendar_features import HolidayCalendar, featurize
from .ingestion import (
    FIXTURE_KINDS,
    CacheFormatError,
    CleaningError,
    CsvFormatError,
    TableError,
    generate_fixture,
    load_instacart,
    load_reviews,
    load_table,
    prepare_retail,
    prepare_spending,
    profile,
    write_csv,
    write_ctbl,
)
from .panel_analytics import (
    counts_by,
    distinct_cities_per_state,
    pearson_weekly,
    rating_distribution,
    retail_group_totals,
    seasonal_category_winners,
    spending_by_dow,
    weekly_series,
    weekly_trend_series,
    yearly_category_winners,
)
from .regression_tree import SplitSpec, TreeError, TreeParams
from .report import Report
from .trend_forecast import (
    ForecastError,
    forecasts_report,
    prediction_histogram,
    run_trend_pipeline,
)

log = logging.getLogger("trendmill")

FAMILIES = ("basket", "spending", "retail", "reviews", "collab")
FAMILY_INPUTS = {
    "basket": ("instacart",),
    "spending": ("spending",),
    "retail": ("retail",),
    "reviews": ("reviews",),
    "collab": ("instacart", "spending", "retail", "reviews"),
}
INPUT_KINDS = ("trends", "instacart", "spending", "retail", "reviews")
OUT_ENV = "TRENDMILL_OUT"

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Missing input or bad configuration (exit 2)."""


@dataclass
class RunConfig:
    trends: str | None = None
    instacart: str | None = None
    spending: str | None = None
    retail: str | None = None
    reviews: str | None = None
    out: str = "out"
    holiday_window: int = 3
    max_depth: int = 5
    min_samples_leaf: int = 1
    seed: int = 1234
    train_fraction: float = 0.8
    rmse_max: float = 3.0
    pred_min: float = 80.0
    target_date: str = "2024-12-31"
    top_k: int = 25
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    fixture_seed: int = 0
    fixture_scale: int = 1000
    gift_keyword: str = "Amazon Giftcard"
    gift_category: str = "Gift Cards"

    def validate(self) -> None:
        if self.rmse_max <= 0 or self.pred_min <= 0:
            raise UsageError("selection thresholds must be positive")
        try:
            dates.to_days(self.target_date)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid target date: {exc}") from None
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        try:
            SplitSpec(self.train_fraction, self.seed)
            TreeParams(self.max_depth, self.min_samples_leaf)
            HolidayCalendar(self.holiday_window)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    @property
    def calendar(self) -> HolidayCalendar:
        return HolidayCalendar(self.holiday_window)

    @property
    def tree_params(self) -> TreeParams:
        return TreeParams(self.max_depth, self.min_samples_leaf)

    @property
    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.seed)


_PATH_KEYS = set(INPUT_KINDS) | {"out"}
_SECTION = "trendmill"


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Paths resolve against the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError:
        raise UsageError(f"config file not found: {path}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for raw_key, value in parser.items(_SECTION):
        key = raw_key.replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}: unknown key {raw_key!r}")
        if key in _PATH_KEYS and not os.path.isabs(value):
            value = str(path.parent / value)
        values[key] = value
    return values


def _coerce(key: str, value):
    default = getattr(RunConfig(), key)
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then ``$TRENDMILL_OUT``, then explicit flags."""
    cfg = RunConfig()
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    if "out" not in merged and os.environ.get(OUT_ENV):
        merged["out"] = os.environ[OUT_ENV]
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            merged[f.name] = v
    try:
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in merged.items()})
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    cfg.validate()
    return cfg


def _require(cfg: RunConfig, kinds) -> None:
    missing = [k for k in kinds if not getattr(cfg, k)]
    if missing:
        raise UsageError(f"missing required input(s): {', '.join(missing)}")
    for k in kinds:
        p = getattr(cfg, k)
        if not os.path.exists(p):
            raise UsageError(f"{k} input not found: {p}")


def _write_reports(out: Path, named: dict[str, Report]) -> None:
    for filename, report in named.items():
        report.write(out, filename)


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- commands -------------------------------------------------------------

def cmd_fixture(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    options = {}
    if args.kind == "trends" and args.keywords:
        options["keywords"] = args.keywords
    tables = generate_fixture(args.kind, cfg.fixture_seed, cfg.fixture_scale, **options)
    for name, table in tables.items():
        write_csv(table, out / f"{name}.csv")
        log.info("wrote %s (%d rows)", out / f"{name}.csv", table.row_count)
    return EXIT_OK


def _profile_targets(cfg: RunConfig, paths) -> list[Path]:
    targets = [Path(p) for p in paths]
    if not targets:
        for kind in INPUT_KINDS:
            p = getattr(cfg, kind)
            if p:
                targets.append(Path(p))
    if not targets:
        raise UsageError("nothing to profile: give file paths or configure inputs")
    expanded = []
    for t in targets:
        if not t.exists():
            raise UsageError(f"input not found: {t}")
        if t.is_dir():
            expanded += sorted(p for p in t.iterdir() if p.suffix in (".csv", ".ctbl"))
        else:
            expanded.append(t)
    return expanded


def cmd_profile(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    for path in _profile_targets(cfg, args.paths):
        table = load_table(path)
        _write_json(out / f"{table.name}.profile.json", profile(table).to_dict())
    return EXIT_OK


def cmd_clean(cfg: RunConfig, args) -> int:
    kind = args.kind
    _require(cfg, [kind])
    out = Path(cfg.out)
    source = getattr(cfg, kind)
    if kind == "retail":
        table = prepare_retail(load_table(source))
    elif kind == "reviews":
        table = load_reviews(source)
    elif kind == "spending":
        table = prepare_spending(load_table(source))
    elif kind == "instacart":
        t = load_instacart(source)
        table = denormalize(**_instacart_args(t), keep_order_id=args.distinct_orders)
    else:
        raise UsageError(f"nothing to clean for {kind!r}")
    write_csv(table, out / f"{table.name}.csv")
    if args.cache:
        write_ctbl(table, out / f"{table.name}.ctbl")
    return EXIT_OK


def _trend_dates(cfg: RunConfig):
    table = load_table(cfg.trends)
    date_cols = [c.name for c in table.columns if c.dtype == "date"]
    if not date_cols:
        raise TableError(f"{cfg.trends}: no date column")
    return table, table[date_cols[0]]


def cmd_features(cfg: RunConfig, args) -> int:
    _require(cfg, ["trends"])
    _, days = _trend_dates(cfg)
    write_csv(featurize(days, cfg.calendar).to_table(), Path(cfg.out) / "features.csv")
    return EXIT_OK


def cmd_forecast(cfg: RunConfig, args) -> int:
    _require(cfg, ["trends"])
    out = Path(cfg.out)
    table, days = _trend_dates(cfg)
    if args.emit_features:
        write_csv(featurize(days, cfg.calendar).to_table(), out / "features.csv")
    forecasts, summary = run_trend_pipeline(
        table, cfg.calendar, cfg.tree_params, cfg.split_spec, cfg.target_date,
        jobs=cfg.jobs, on_error="collect", rmse_max=cfg.rmse_max, pred_min=cfg.pred_min)
    forecasts_report(forecasts).write(out, "forecasts.csv", plot=False)
    prediction_histogram(forecasts).write(out, "histogram.csv")
    doc = {
        "count": summary.count,
        "min": summary.min,
        "max": summary.max,
        "mean": summary.mean,
        "variance": summary.variance,
        "selected": list(summary.selected),
        "failed": summary.failed,
        "seed": cfg.seed,
        "train_fraction": cfg.train_fraction,
        "max_depth": cfg.max_depth,
        "min_samples_leaf": cfg.min_samples_leaf,
        "holiday_window": cfg.holiday_window,
        "target_date": cfg.target_date,
        "rmse_max": cfg.rmse_max,
        "pred_min": cfg.pred_min,
    }
    _write_json(out / "summary.json", doc)
    if args.select:
        (out / "selected.txt").write_text("".join(f"{k}\n" for k in summary.selected), encoding="utf-8")
    if summary.failed:
        for kw, msg in summary.failed.items():
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _instacart_args(t: dict) -> dict:
    return {
        "aisles": t["aisles"],
        "departments": t["departments"],
        "products": t["products"],
        "orders": t["orders"],
        "order_products_prior": t["order_products__prior"],
        "order_products_train": t["order_products__train"],
    }


def _merge_dow(all_orders: Report, reordered: Report, name: str) -> Report:
    return Report(name, ("dow", "orders", "reordered_orders"),
                  [(d, a, r) for (d, a), (_, r) in zip(all_orders.rows, reordered.rows)], y="orders")


def _basket(cfg: RunConfig, distinct: bool):
    return denormalize(**_instacart_args(load_instacart(cfg.instacart)), keep_order_id=distinct)


def cmd_analyze(cfg: RunConfig, args) -> int:
    family = args.family
    _require(cfg, FAMILY_INPUTS[family])
    out = Path(cfg.out) / family
    if family == "basket":
        basket = _basket(cfg, args.distinct_orders)
        _write_reports(out, {
            "hourly.csv": orders_per_hour(basket, distinct_orders=args.distinct_orders),
            "dow.csv": _merge_dow(orders_per_dow(basket), orders_per_dow(basket, True), "dow"),
            "dept_shares.csv": category_shares(basket, "department"),
            "aisle_shares.csv": category_shares(basket, "aisle", top_k=cfg.top_k),
            "reorder_by_position.csv": reorder_rate_by_position(basket),
        })
    elif family == "spending":
        panel = prepare_spending(load_table(cfg.spending))
        _write_reports(out, {
            "winners.csv": yearly_category_winners(panel),
            "seasonal_winners.csv": seasonal_category_winners(panel),
            "spending_dow.csv": spending_by_dow(panel, "AllSpending"),
        })
    elif family == "retail":
        panel = prepare_retail(load_table(cfg.retail))
        reports = {f"retail_by_{by}.csv": retail_group_totals(panel, by)
                   for by in ("state", "region", "month", "age_group")}
        reports["cities_per_state.csv"] = distinct_cities_per_state(panel)
        _write_reports(out, reports)
    elif family == "reviews":
        panel = load_reviews(cfg.reviews)
        reports = {"ratings.csv": rating_distribution(panel)}
        for key in ("category", "year", "dow", "month"):
            reports[f"reviews_by_{key}.csv"] = counts_by(panel, key)
        _write_reports(out, reports)
    else:
        basket = _basket(cfg, False)
        spending = prepare_spending(load_table(cfg.spending))
        retail = prepare_retail(load_table(cfg.retail))
        reviews = load_reviews(cfg.reviews)
        gift = weekly_series(reviews, cfg.gift_category)
        _write_reports(out, {
            "dow_instacart.csv": _merge_dow(orders_per_dow(basket), orders_per_dow(basket, True),
                                            "dow_instacart"),
            "dow_spending.csv": spending_by_dow(spending, "AllSpending"),
            "dow_reviews.csv": counts_by(reviews, "dow"),
            "month_retail.csv": retail_group_totals(retail, "month"),
            "month_reviews.csv": counts_by(reviews, "month"),
            "giftcard_weekly.csv": gift,
        })
        if cfg.trends and os.path.exists(cfg.trends):
            trends = load_table(cfg.trends)
            if cfg.gift_keyword in trends:
                series = weekly_trend_series(trends, cfg.gift_keyword)
                series.write(out, "giftcard_trends_weekly.csv")
                _write_json(out / "correlation.json", pearson_weekly(gift, series))
            else:
                log.warning("trends input has no %r column; skipping correlation", cfg.gift_keyword)
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", help=f"output directory (falls back to ${OUT_ENV}, then ./out)")
    p.add_argument("--jobs", type=int, help="worker threads for per-keyword training")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    for kind in INPUT_KINDS:
        p.add_argument(f"--{kind}", help=f"{kind} input path")
    return p


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="train/test split seed (default 1234)")
    p.add_argument("--train-fraction", dest="train_fraction", type=float, help="default 0.8")
    p.add_argument("--max-depth", dest="max_depth", type=int, help="default 5")
    p.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int)
    p.add_argument("--holiday-window", dest="holiday_window", type=int, help="days either side (default 3)")
    p.add_argument("--target-date", dest="target_date", help="prediction date (default 2024-12-31)")
    p.add_argument("--rmse-max", dest="rmse_max", type=float, help="selection bound (default 3.0)")
    p.add_argument("--pred-min", dest="pred_min", type=float, help="selection bound (default 80.0)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="trendmill", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", parents=[common], help="write a synthetic dataset as CSV")
    p.add_argument("kind", choices=FIXTURE_KINDS)
    p.add_argument("--seed", dest="fixture_seed", type=int)
    p.add_argument("--scale", dest="fixture_scale", type=int)
    p.add_argument("--keywords", type=int, help="keyword columns (trends only)")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("profile", parents=[common], help="write <table>.profile.json per input")
    p.add_argument("paths", nargs="*")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("clean", parents=[common], help="apply a dataset's cleaning recipe")
    p.add_argument("kind", choices=("instacart", "spending", "retail", "reviews"))
    p.add_argument("--cache", action="store_true", help="also write a .ctbl cache")
    p.add_argument("--distinct-orders", dest="distinct_orders", action="store_true")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("features", parents=[common], help="dump calendar features for the trends dates")
    p.add_argument("--holiday-window", dest="holiday_window", type=int)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("forecast", parents=[common], help="per-keyword trees, RMSE and predictions")
    _model_flags(p)
    p.add_argument("--select", action="store_true", help="also write selected.txt")
    p.add_argument("--emit-features", dest="emit_features", action="store_true")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("analyze", parents=[common], help="aggregation reports for one family")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--top-k", dest="top_k", type=int, help="aisles kept in aisle_shares (default 25)")
    p.add_argument("--distinct-orders", dest="distinct_orders", action="store_true",
                   help="count distinct orders per hour instead of order lines")
    p.add_argument("--keyword", dest="gift_keyword", help="trends column for the gift-card correlation")
    p.add_argument("--category", dest="gift_category", help="review category for the weekly series")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return args.func(cfg, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: input not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CsvFormatError, CacheFormatError, TableError, CleaningError, TreeError,
            ForecastError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
