"""Shared test fixtures and the acceptance-result summary hook."""

from __future__ import annotations

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, description: str, passed: bool, detail: str = ""):
    """Log one acceptance-criterion outcome and assert it.

    The collected lines are echoed in the terminal summary so the run
    output contains one pass/fail line per criterion.
    """
    status = "PASS" if passed else "FAIL"
    line = f"CRITERION {number:2d} [{status}] {description}"
    if detail:
        line += f" ({detail})"
    _ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
