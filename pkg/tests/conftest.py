import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def instacart_small():
    from trendmill.ingestion import generate_fixture

    return generate_fixture("instacart", seed=5, scale=3000)


@pytest.fixture(scope="session")
def basket_small(instacart_small):
    from trendmill.basket_analytics import denormalize

    t = instacart_small
    return denormalize(t["aisles"], t["departments"], t["products"], t["orders"],
                       t["order_products__prior"], t["order_products__train"])


@pytest.fixture(scope="session")
def retail_small():
    from trendmill.ingestion import generate_fixture, prepare_retail

    return prepare_retail(generate_fixture("walmart", seed=2, scale=20000)["walmart"])


@pytest.fixture(scope="session")
def spending_small():
    from trendmill.ingestion import generate_fixture, prepare_spending

    return prepare_spending(generate_fixture("spending", seed=3, scale=25000, states=10)["spending"])


@pytest.fixture(scope="session")
def reviews_small():
    from trendmill.ingestion import generate_fixture, prepare_reviews

    t = generate_fixture("amazon", seed=7, scale=20000)
    return prepare_reviews(t["ratings"], t["asins"])


_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    if report.failed or (report.when == "call" and label not in _criteria):
        _criteria[label] = "FAIL" if report.failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(f"criterion {label}: {_criteria[label]}")
