import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line for the end-of-run criteria summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        _VERDICTS.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        print(_VERDICTS[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
