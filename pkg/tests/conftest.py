"""Collects one-line verdicts from the acceptance tests for the summary."""

from __future__ import annotations

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance checks")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
