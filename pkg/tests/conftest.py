import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_label(label: str) -> np.ndarray:
    """Kronecker product of single-qubit Paulis; qubit 0 is the leftmost factor."""
    return functools.reduce(np.kron, [SINGLE[c] for c in label], np.eye(1, dtype=complex))


def dense_hamiltonian(terms: dict) -> np.ndarray:
    n = len(next(iter(terms)))
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for lab, v in terms.items():
        out += v * dense_label(lab)
    return out


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(H)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def dense_coefficients(U: np.ndarray, labels) -> np.ndarray:
    dim = U.shape[0]
    return np.array([np.trace(dense_label(lab).conj().T @ U) / dim for lab in labels])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
