"""Shared fixtures: the full continuation branch and acceptance reporting.

The 10 -> 160 branch takes about a minute and backs both the
asymptotics criteria and the eigenvalue scan, so it is built once per
session.  Criterion tests log one PASS/FAIL line each through the
acceptance_log fixture; the collected lines are printed in a terminal
section after the run.
"""

import pytest

from bilap4d.solver import continuation

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def branch_full():
    return continuation(10.0, 160.0)


@pytest.fixture(scope="session")
def acceptance_log():
    def record(line: str) -> None:
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
