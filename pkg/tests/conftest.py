import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def rrc_oracle():
    return json.loads((DATA / "rrc_oracle.json").read_text())


@pytest.fixture
def verdict():
    """Record one acceptance criterion's outcome and print it."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
