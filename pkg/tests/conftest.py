"""Shared pytest configuration: per-criterion acceptance reporting.

Tests marked @pytest.mark.criterion(n, title) are aggregated into one
PASS/FAIL line per criterion at the end of the run.
"""

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(number, title): acceptance criterion this test checks",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    relevant = report.when == "call" or (
        report.when == "setup" and not report.passed
    )
    if not relevant:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(
        number, {"title": title, "failed": [], "ran": 0}
    )
    entry["ran"] += 1
    if not report.passed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        if entry["failed"]:
            status = "FAIL"
            detail = "  [" + ", ".join(sorted(entry["failed"])) + "]"
        else:
            status = "PASS"
            detail = ""
        terminalreporter.write_line(
            f"criterion {number}: {status}  {entry['title']}{detail}"
        )
