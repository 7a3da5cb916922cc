import csv
import json
from pathlib import Path

import pytest

from trendmill.cli import build_config, build_parser, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().err


def tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("inputs")
    specs = {
        "trends": ("trends", ["--scale", 104, "--keywords", 20]),
        "instacart": ("instacart", ["--scale", 400]),
        "spending": ("spending", ["--scale", 6000]),
        "retail": ("walmart", ["--scale", 3000]),
        "reviews": ("amazon", ["--scale", 3000]),
    }
    for name, (kind, extra) in specs.items():
        assert main(["fixture", kind, "--seed", "3", "--out", str(root / name), *map(str, extra)]) == 0
    return {
        "trends": root / "trends" / "trends.csv",
        "instacart": root / "instacart",
        "spending": root / "spending" / "spending.csv",
        "retail": root / "retail" / "walmart.csv",
        "reviews": root / "reviews",
    }


def flags(inputs, *kinds):
    out = []
    for k in kinds:
        out += [f"--{k}", str(inputs[k])]
    return out


def test_profile_and_missing_file(capsys, inputs, tmp_path):
    code, _ = run(capsys, "profile", inputs["trends"], "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "trends.profile.json").read_text())
    assert doc
    missing = tmp_path / "nope.csv"
    code, err = run(capsys, "profile", missing, "--out", tmp_path)
    assert code == 2 and str(missing) in err


def test_ragged_csv_exit_1_names_line(capsys, tmp_path):
    lines = ["a,b"] + [f"{i},{i}" for i in range(15)] + ["1,2,3"]
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    code, err = run(capsys, "profile", bad, "--out", tmp_path / "o")
    assert code == 1 and "line 17" in err


def test_forecast_outputs_and_determinism(capsys, inputs, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code, _ = run(capsys, "forecast", "--select", "--trends", inputs["trends"], "--out", out, "--jobs", 3)
        assert code == 0
    assert tree(a) == tree(b)
    summary = json.loads((a / "summary.json").read_text())
    assert summary["seed"] == 1234 and summary["train_fraction"] == 0.8
    assert summary["count"] == 20 and summary["min"] <= summary["mean"] <= summary["max"]
    rows = read_csv(a / "forecasts.csv")
    assert list(rows[0]) == ["keyword", "rmse", "prediction"]
    expected = [r["keyword"] for r in rows if float(r["rmse"]) < 3.0 and float(r["prediction"]) > 80.0]
    assert (a / "selected.txt").read_text().splitlines() == expected
    assert summary["selected"] == expected
    assert (a / "histogram.csv").exists()


def test_forecast_serial_matches_parallel(capsys, inputs, tmp_path):
    run(capsys, "forecast", "--trends", inputs["trends"], "--out", tmp_path / "p", "--jobs", 4)
    run(capsys, "forecast", "--trends", inputs["trends"], "--out", tmp_path / "s", "--jobs", 1)
    assert tree(tmp_path / "p") == tree(tmp_path / "s")


def test_forecast_keyword_failure_exit_1(capsys, tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("date,ok,bad\n2024-01-07,10,5\n2024-01-14,20,150\n2024-01-21,30,5\n")
    code, err = run(capsys, "forecast", "--trends", path, "--out", tmp_path / "o")
    assert code == 1 and "'bad'" in err
    rows = read_csv(tmp_path / "o" / "forecasts.csv")
    assert [r["keyword"] for r in rows] == ["ok"]
    assert "bad" in json.loads((tmp_path / "o" / "summary.json").read_text())["failed"]


def test_forecast_without_trends_is_usage_error(capsys, tmp_path):
    code, err = run(capsys, "forecast", "--out", tmp_path)
    assert code == 2 and "trends" in err


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 7  # split seed\nmax_depth = 3\ntrends = data/t.csv\nout = from_cfg\n")
    parser = build_parser()
    c = build_config(parser.parse_args(["forecast", "--config", str(cfg), "--max-depth", "4"]))
    assert (c.seed, c.max_depth, c.train_fraction) == (7, 4, 0.8)
    assert Path(c.trends) == tmp_path / "data" / "t.csv"
    monkeypatch.setenv("TRENDMILL_OUT", str(tmp_path / "env"))
    assert Path(build_config(parser.parse_args(["forecast"])).out) == tmp_path / "env"
    assert build_config(parser.parse_args(["forecast", "--config", str(cfg)])).out.endswith("from_cfg")
    c = build_config(parser.parse_args(["forecast", "--out", "flag"]))
    assert c.out == "flag"


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, err = run(capsys, "forecast", "--config", cfg)
    assert code == 2 and "colour" in err


def test_invalid_option_values_are_usage_errors(capsys, inputs, tmp_path):
    code, _ = run(capsys, "forecast", "--trends", inputs["trends"], "--train-fraction", 1.5, "--out", tmp_path)
    assert code == 2
    code, _ = run(capsys, "forecast", "--trends", inputs["trends"], "--target-date", "2024-13-01",
                  "--out", tmp_path)
    assert code == 2


def test_analyze_basket(capsys, inputs, tmp_path):
    code, _ = run(capsys, "analyze", "basket", *flags(inputs, "instacart"), "--out", tmp_path)
    assert code == 0
    d = tmp_path / "basket"
    for name in ("hourly", "dow", "dept_shares", "aisle_shares", "reorder_by_position"):
        assert (d / f"{name}.csv").exists() and (d / f"{name}.plot.csv").exists()
    shares = [float(r["share"]) for r in read_csv(d / "dept_shares.csv")]
    assert abs(sum(shares) - 100) <= 1e-6
    assert len(read_csv(d / "aisle_shares.csv")) <= 25


def test_analyze_spending_one_row_per_year(capsys, inputs, tmp_path):
    code, _ = run(capsys, "analyze", "spending", *flags(inputs, "spending"), "--out", tmp_path)
    assert code == 0
    years = {r["Date"][:4] for r in read_csv(inputs["spending"])}
    winners = read_csv(tmp_path / "spending" / "winners.csv")
    assert sorted(r["year"] for r in winners) == sorted(years)


def test_analyze_collab_requires_reviews(capsys, inputs, tmp_path):
    code, err = run(capsys, "analyze", "collab", *flags(inputs, "instacart", "spending", "retail"),
                    "--out", tmp_path)
    assert code == 2 and "reviews" in err


def test_analyze_missing_path_is_usage_error(capsys, tmp_path):
    code, err = run(capsys, "analyze", "retail", "--retail", tmp_path / "absent.csv", "--out", tmp_path)
    assert code == 2 and "absent.csv" in err


@pytest.mark.parametrize("family", ["basket", "spending", "retail", "reviews", "collab"])
def test_analyze_deterministic(capsys, inputs, tmp_path, family):
    kinds = {"basket": ["instacart"], "spending": ["spending"], "retail": ["retail"], "reviews": ["reviews"],
             "collab": ["instacart", "spending", "retail", "reviews", "trends"]}[family]
    for out in ("a", "b"):
        code, _ = run(capsys, "analyze", family, *flags(inputs, *kinds), "--out", tmp_path / out)
        assert code == 0
    first = tree(tmp_path / "a")
    assert first and first == tree(tmp_path / "b")
    if family == "collab":
        corr = json.loads((tmp_path / "a" / "collab" / "correlation.json").read_text())
        assert set(corr) == {"pearson_r", "n_weeks"}


def test_clean_and_features_do_not_touch_inputs(capsys, inputs, tmp_path):
    before = inputs["retail"].read_bytes()
    code, _ = run(capsys, "clean", "retail", "--cache", *flags(inputs, "retail"), "--out", tmp_path)
    assert code == 0 and inputs["retail"].read_bytes() == before
    assert list(tmp_path.glob("*.ctbl"))
    code, _ = run(capsys, "features", *flags(inputs, "trends"), "--out", tmp_path)
    assert code == 0
    header = (tmp_path / "features.csv").read_text().splitlines()[0]
    assert header.endswith("year,month,day,season,is_holiday,day_of_week,is_weekend,sin_season,cos_season")
