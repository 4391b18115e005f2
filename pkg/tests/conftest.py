import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (title, passed, detail); filled by the acceptance tests
CRITERIA = {}


@pytest.fixture(scope="session")
def frozen_constants():
    return json.loads((FIXTURES / "calibration.json").read_text())["constants"]


@pytest.fixture
def criterion():
    def record(number, title, passed, detail=""):
        CRITERIA[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, passed, detail = CRITERIA[number]
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
