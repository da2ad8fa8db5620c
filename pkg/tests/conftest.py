import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from helpers import fig2_problem  # noqa: E402

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fig2():
    return fig2_problem()


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
