import pytest

from sos_bounds.config import get_settings, set_settings


def pytest_addoption(parser):
    parser.addoption(
        "--long", action="store_true", default=False, help="also run slow acceptance tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "long: slow test, only run with --long")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip_long = pytest.mark.skip(reason="needs --long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip_long)


@pytest.fixture
def restore_settings():
    previous = get_settings()
    yield previous
    set_settings(previous)
