import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid or "criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.split("::")[-1]
        detail = dict(report.user_properties).get("measured", "")
        _criteria[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        status, detail = _criteria[name]
        terminalreporter.write_line(f"{status} {name}" + (f" | {detail}" if detail else ""))
