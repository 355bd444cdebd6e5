import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        measured = "; ".join(str(v) for k, v in report.user_properties if k == "measured")
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _criteria.append((marker.args[0], status, marker.args[1], measured, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text, measured, secs in sorted(_criteria, key=lambda c: c[0]):
        line = f"criterion {number:>2} {status}: {text}"
        if measured:
            line += f" | {measured}"
        terminalreporter.write_line(f"{line} ({secs:.1f}s)")
