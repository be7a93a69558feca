import os

# results of tests/test_acceptance.py, printed once at the end of the session
ACCEPTANCE = {}

os.environ.setdefault("HYPOTHESIS_PROFILE", "default")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
