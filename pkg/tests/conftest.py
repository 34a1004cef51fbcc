import contextlib

import pytest

ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Context manager recording one acceptance line, pass or fail."""

    @contextlib.contextmanager
    def check(label):
        try:
            yield
        except BaseException as exc:
            ACCEPTANCE.append((label, False, str(exc).splitlines()[0] if str(exc) else type(exc).__name__))
            raise
        ACCEPTANCE.append((label, True, ""))

    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}"
        if detail:
            line += f"  -- {detail}"
        terminalreporter.write_line(line)
