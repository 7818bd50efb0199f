"""Shared pytest plumbing: per-criterion pass/fail summary lines."""

import pytest

_criterion_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, description = marker.args
    _criterion_results.append((number, description, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, outcome in sorted(_criterion_results):
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"criterion {number}: {status} - {description}")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, description): acceptance criterion coverage"
    )
