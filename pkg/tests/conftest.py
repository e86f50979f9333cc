"""Prints the acceptance verdicts collected by test_acceptance.py."""

VERDICTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(VERDICTS):
        terminalreporter.write_line(f"criterion {k}: {VERDICTS[k]}")
