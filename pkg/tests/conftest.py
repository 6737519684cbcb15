import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rgtoric.cell import default_geometry, derive_cell_basis  # noqa: E402


@pytest.fixture(scope="session")
def basis():
    return derive_cell_basis(default_geometry())


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
