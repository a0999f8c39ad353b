import pytest

from gelswell.hyperbolicity import admissible_psi_star
from gelswell.params import POLYMER, POLYSACCHARIDE

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def polymer():
    return POLYMER


@pytest.fixture(scope="session")
def polysaccharide():
    return POLYSACCHARIDE


@pytest.fixture(scope="session")
def psi_star_polymer():
    return admissible_psi_star(POLYMER)


@pytest.fixture(scope="session")
def psi_star_polysaccharide():
    return admissible_psi_star(POLYSACCHARIDE)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
