import os

# make the acceptance summary lines visible at the end of every run
def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for i in sorted(LINES):
            terminalreporter.write_line(LINES[i])
