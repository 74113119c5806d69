
def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for key in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[key])
