import pytest

_ACCEPTANCE = []


@pytest.fixture
def report(request):
    """Attach measured values to the test report: ``report(key=value, ...)``."""

    def _record(**kwargs):
        for k, v in kwargs.items():
            request.node.user_properties.append((k, v))

    return _record


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for rep in _ACCEPTANCE:
        name = rep.nodeid.split("::")[-1]
        status = "PASS" if rep.passed else "FAIL"
        detail = ", ".join(f"{k}={_fmt(v)}" for k, v in rep.user_properties)
        terminalreporter.write_line(f"{status}  {name}  {detail}")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)
