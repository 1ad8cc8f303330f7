import pytest

VERDICTS = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance check."""
    seen = []

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        seen.append(line)
        VERDICTS.append(line)
        print(line)
        return ok

    yield record
    if not seen:
        VERDICTS.append(f"FAIL  {request.node.name}: raised before reaching a verdict")


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance")
        for line in VERDICTS:
            terminalreporter.write_line(line)
