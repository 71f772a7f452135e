import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Print one ``PASS``/``FAIL`` line per acceptance criterion and keep it for the summary."""

    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
        print(line)
        _LINES.append(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
