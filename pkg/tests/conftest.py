import numpy as np
import pytest

from qotomo.core import pure_density
from qotomo.source import ghz_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ghz4():
    return pure_density(ghz_state(4))


def ket(*letters):
    """Product state from polarization letters H, V, D, A."""
    s = 1 / np.sqrt(2)
    table = {"H": [1, 0], "V": [0, 1], "D": [s, s], "A": [s, -s]}
    out = np.array([1.0 + 0j])
    for letter in letters:
        out = np.kron(out, np.array(table[letter], dtype=complex))
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
