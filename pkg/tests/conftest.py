import pytest

_CRITERIA = {}


@pytest.fixture
def record_criterion():
    """Record one acceptance line; the summary prints them all at the end."""

    def record(number, title, passed, detail):
        _CRITERIA[number] = (title, bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        )
