"""Shared pytest hooks.

The acceptance tests record one human-readable verdict line per criterion;
this hook replays them in the terminal summary so the verdicts stay visible
even when per-test output capture is on.
"""

ACCEPTANCE_LINES = []


def record_acceptance(line):
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
