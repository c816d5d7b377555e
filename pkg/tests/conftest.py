import numpy as np
import pytest
from hypothesis import settings

from polarlab.polar_code import build_codespec, load_default_spec

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture(scope="session")
def default_spec():
    return load_default_spec()


@pytest.fixture(scope="session")
def small_spec():
    """(64, 32) code with a 6-bit CRC and 12 unreliable bits."""
    return build_codespec(6, 32, 6, unreliable_budget=12, crc_poly=0x43)


def gf2_kron_matrix(n):
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, F)
    return G


ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance check and fail on FAIL."""

    def record(tag, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {tag} {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
