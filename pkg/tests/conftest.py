"""Shared pytest wiring: the acceptance checklist printed after the run."""

CHECKLIST: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CHECKLIST:
        terminalreporter.section("acceptance checklist")
        for line in CHECKLIST:
            terminalreporter.write_line(line)
