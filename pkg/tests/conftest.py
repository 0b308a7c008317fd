import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drfeas import DATA_DIR  # noqa: E402

# (criterion number, passed, detail) lines collected by the acceptance tests
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture
def criterion():
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
