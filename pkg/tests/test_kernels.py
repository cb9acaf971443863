import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import dense_label
from hamprobe import _kernels_py, kernels
from hamprobe.pauli import PauliString, all_strings

compiled = pytest.importorskip("hamprobe._kernels")
BACKENDS = [_kernels_py, compiled]


def hadamard(m):
    H = np.array([[1.0]])
    for _ in range(m):
        H = np.kron(H, np.array([[1.0, 1.0], [1.0, -1.0]]))
    return H


@pytest.mark.parametrize("backend", BACKENDS, ids=["python", "cython"])
@pytest.mark.parametrize("dtype", [np.float64, np.complex128])
def test_fwht_matches_hadamard_matrix(backend, dtype, rng):
    v = rng.normal(size=(3, 32)).astype(dtype)
    if dtype is np.complex128:
        v = v + 1j * rng.normal(size=(3, 32))
    expected = v @ hadamard(5).T
    out = backend.fwht(v.copy())
    assert np.allclose(out, expected)


@pytest.mark.parametrize("backend", BACKENDS, ids=["python", "cython"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_coefficients_against_traces(backend, n, rng):
    dim = 1 << n
    M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    c = backend.pauli_coefficients(M)
    for x in all_strings(n):
        assert c[x.index] == pytest.approx(np.trace(dense_label(x.label) @ M) / dim)
    assert np.allclose(backend.pauli_synthesize(c, n), M)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_backends_agree(n, rng):
    dim = 1 << n
    M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    c = _kernels_py.pauli_coefficients(M)
    assert np.allclose(compiled.pauli_coefficients(M), c)
    assert np.allclose(compiled.pauli_synthesize(c, n), _kernels_py.pauli_synthesize(c, n))
    strings = rng.integers(0, 4**n, size=500).astype(np.uint64)
    gens = rng.integers(1, 4**n, size=min(n, 5)).astype(np.uint64)
    assert np.array_equal(
        compiled.symplectic_syndromes(strings, gens, n), _kernels_py.symplectic_syndromes(strings, gens, n)
    )
    assert len(compiled.symplectic_syndromes(strings, gens[:0], n)) == 500


def test_syndrome_example():
    x = PauliString.from_label("X").index
    z = PauliString.from_label("Z").index
    out = _kernels_py.symplectic_syndromes(np.array([0, x, z]), np.array([z]), 1)
    assert list(out) == [0, 1, 0]


def test_backend_selection():
    assert kernels.BACKEND == "cython"
    env = dict(os.environ, HAMPROBE_PURE_PYTHON="1")
    proc = subprocess.run(
        [sys.executable, "-c", "from hamprobe import kernels; print(kernels.BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.stdout.strip() == "python"
