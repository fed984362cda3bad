_CRITERIA: list[str] = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _CRITERIA.extend(l for l in report.capstdout.splitlines() if l.startswith("criterion "))


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
