import math
import time

import pytest

from driftfk.geometry import Disk, Ellipse, Rectangle, rasterize

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item.user_properties.append(("elapsed", time.perf_counter() - start))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    elapsed = dict(item.user_properties).get("elapsed", float("nan"))
    _CRITERIA[mark.args[0]] = (mark.args[1], report.outcome, elapsed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome, elapsed = _CRITERIA[number]
        flag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {flag}  {title}  ({elapsed:.1f} s)")


@pytest.fixture(scope="session")
def unit_disk():
    return Disk(1.0)


@pytest.fixture(scope="session")
def unit_square():
    return Rectangle((0.0, 0.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def ellipse_2to1():
    return Ellipse((math.sqrt(2.0), 1 / math.sqrt(2.0)))


@pytest.fixture(scope="session")
def disk_mask_64(unit_disk):
    return rasterize(unit_disk, 1 / 64)


@pytest.fixture(scope="session")
def square_mask_64(unit_square):
    return rasterize(unit_square, 1 / 64)
