import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

WORKED_CSV = (
    "date,ticker,close\n"
    "2002-01-04,6758,257\n"
    "2002-01-07,6758,239\n"
    "2002-01-08,6758,228\n"
    "2002-01-09,6758,235\n"
    "2002-01-10,6758,245\n"
)


@pytest.fixture
def worked_csv(tmp_path):
    p = tmp_path / "worked.csv"
    p.write_text(WORKED_CSV)
    return p


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    key = marker
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        notes = dict(report.user_properties).get("note", "")
        prev = _ACCEPTANCE.get(key)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[key] = (outcome, notes)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep.acceptance = m.args


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), (outcome, note) in sorted(_ACCEPTANCE.items()):
        line = f"[{outcome}] {number}. {title}"
        if note:
            line += f" -- {note}"
        terminalreporter.write_line(line)
