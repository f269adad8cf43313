import os

import pytest

from constructicon.lexicon import load_lexicon

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")

ACCEPTANCE_LINES: list[str] = []


def fixture_path(*parts) -> str:
    return os.path.join(FIXTURES, *parts)


@pytest.fixture(scope="session")
def paper_lexicon():
    return load_lexicon(fixture_path("paper.lexicon.json"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
