import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def measured(request):
    """Call with a short string to attach the measured value to the summary line."""
    def record(text):
        request.node.measured_text = text
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or report.failed):
        return
    number, title = marker.args
    ok = report.passed and report.when == "call"
    text = getattr(item, "measured_text", "")
    if "[" in item.name:
        text = f"{item.name.split('[', 1)[1].rstrip(']')}: {text}"
    _, prev_ok, prev_text = _RESULTS.get(number, (title, True, ""))
    _RESULTS[number] = (title, prev_ok and ok, "; ".join(t for t in (prev_text, text) if t))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok, text = _RESULTS[number]
        suffix = f" ({text})" if text else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:>2}. {title}{suffix}")
