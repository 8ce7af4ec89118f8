import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_hermitian(rng, dim, scale=1.0):
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (X + X.conj().T) / 2


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
