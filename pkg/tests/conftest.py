import sys
from pathlib import Path

import pytest

from fersml.xmlio import sample_bytes, sample_document

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def sample_xml() -> bytes:
    return sample_bytes()


@pytest.fixture(scope="session")
def sample_doc():
    return sample_document()


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_lines(request) -> list:
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
