import datetime as dt

import pytest

from helpers import make_series


@pytest.fixture
def series42():
    return make_series(42)


@pytest.fixture
def d():
    return dt.date.fromisoformat


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LOG

    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
