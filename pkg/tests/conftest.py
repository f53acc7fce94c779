import pytest

_CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion as PASS/FAIL for the summary."""
    marker = request.node.get_closest_marker("criterion")
    label = marker.args[0] if marker else request.node.name
    _CRITERIA[label] = "FAIL"
    yield label
    rep = getattr(request.node, "rep_call", None)
    if rep is not None and rep.passed:
        _CRITERIA[label] = "PASS"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _CRITERIA.items():
        terminalreporter.write_line(f"{status}  {label}")
