import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from portcap.houston import load_houston  # noqa: E402


@pytest.fixture(scope="session")
def houston():
    return load_houston()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
