import pytest

_acceptance = {}


def pytest_runtest_logreport(report):
    if "acceptance" not in report.keywords:
        return
    note = "; ".join(v for k, v in report.user_properties if k == "note")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid] = (report.outcome, note)
    elif report.when == "teardown" and report.outcome == "failed":
        _acceptance[report.nodeid] = ("failed", note)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, note) in _acceptance.items():
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        line = f"{label}  {nodeid.split('::')[-1]}"
        terminalreporter.write_line(line + (f"  ({note})" if note else ""))


@pytest.fixture
def note(request):
    """Attach a short measurement to the criterion's summary line."""
    def add(text):
        request.node.user_properties.append(("note", text))
    return add
