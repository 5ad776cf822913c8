import pytest

# criterion number -> (outcome, detail lines)
_RESULTS = {}
_DETAILS = {}


@pytest.fixture
def criterion(request):
    """Collects detail lines for the acceptance summary of the current test."""
    marker = request.node.get_closest_marker("acceptance")
    key = marker.args[0] if marker else request.node.name
    lines = _DETAILS.setdefault(key, [])
    return lines.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        key = marker.args[0]
        prev = _RESULTS.get(key, "PASS")
        _RESULTS[key] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS):
        detail = "; ".join(_DETAILS.get(key, []))
        terminalreporter.write_line(f"criterion {key:>2}: {_RESULTS[key]}  {detail}")
