"""Shared pytest plumbing: re-print acceptance criterion lines at the end."""

import pytest

_CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion_log():
    """Sink for per-criterion pass/fail lines echoed in the summary."""
    return _CRITERION_LINES


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
