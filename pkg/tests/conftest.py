import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion_report():
    """Record and print one PASS/FAIL line per acceptance criterion; the
    lines are replayed in the terminal summary so they survive output
    capture."""

    def record(name: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
