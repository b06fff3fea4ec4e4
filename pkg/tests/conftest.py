import numpy as np
import pytest

from sptsim.circuits import cluster_state_circuit
from sptsim.execution import evolve

# criterion number -> (title, passed); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cluster4():
    return evolve(cluster_state_circuit(4, "open"))


def random_density_matrix(n: int, rng) -> np.ndarray:
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    m = a @ a.conj().T
    return m / np.trace(m)


def random_state_vector(n: int, rng) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k}: {title}")
