"""Collects the acceptance-criterion verdicts and prints them at the end."""

RESULTS: list = []


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
