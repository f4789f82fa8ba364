import pytest

_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdicts():
    """Collects one pass/fail line per acceptance criterion for the final summary."""
    return _VERDICTS


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
