import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance outcome: ``criterion(n, ok, detail)``."""

    def record(n: int, ok: bool, detail: str):
        _CRITERIA[n] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
