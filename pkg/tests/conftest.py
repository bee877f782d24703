import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome for the end-of-run summary."""

    def record(name, passed, detail=""):
        _ACCEPTANCE[name] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        passed, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
