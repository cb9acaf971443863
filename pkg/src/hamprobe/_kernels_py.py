"""Pure numpy implementations of the hot kernels.

Same signatures and results as the compiled module. Pauli strings are packed
as ``(a << n) | b`` where ``a`` holds the X bits and ``b`` the Z bits, and bit
``n-1-q`` of each word belongs to qubit ``q``.
"""

import numpy as np


def fwht(vec: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis, in place."""
    assert vec.flags.c_contiguous
    size = vec.shape[-1]
    lead = vec.shape[:-1]
    h = 1
    while h < size:
        view = vec.reshape(lead + (size // (2 * h), 2, h))
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] += hi
        np.subtract(lo, hi, out=view[..., 1, :])
        h *= 2
    return vec


def _phase_table(n: int) -> np.ndarray:
    dim = 1 << n
    a = np.arange(dim, dtype=np.uint64)
    ab = a[:, None] & a[None, :]
    powers = np.array([1, 1j, -1, -1j], dtype=np.complex128)
    return powers[np.bitwise_count(ab) % 4]


def pauli_coefficients(mat: np.ndarray) -> np.ndarray:
    """Return Tr(sigma_x M)/2^n for every packed x, as a complex 4^n vector."""
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    dim = mat.shape[0]
    n = dim.bit_length() - 1
    k = np.arange(dim)
    # row a holds M[k, k ^ a]
    gathered = mat[k[None, :], k[None, :] ^ k[:, None]]
    fwht(gathered)
    gathered *= _phase_table(n)
    gathered /= dim
    return gathered.reshape(-1)


def pauli_synthesize(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Inverse of ``pauli_coefficients``: the matrix sum_x c_x sigma_x."""
    dim = 1 << n
    w = np.array(coeffs, dtype=np.complex128).reshape(dim, dim)
    w *= _phase_table(n)
    fwht(w)
    k = np.arange(dim)
    out = np.empty((dim, dim), dtype=np.complex128)
    # column k of sigma_(a,b) has its entry in row k ^ a
    out[k[None, :] ^ k[:, None], k[None, :]] = w
    return out


def symplectic_syndromes(strings: np.ndarray, gens: np.ndarray, n: int) -> np.ndarray:
    """Bucket labels: bit j of the result is [x, gens[j]]."""
    strings = np.asarray(strings, dtype=np.uint64)
    gens = np.asarray(gens, dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    shift = np.uint64(n)
    xa = (strings >> shift)[:, None]
    xb = (strings & mask)[:, None]
    ga = (gens >> shift)[None, :]
    gb = (gens & mask)[None, :]
    bits = np.bitwise_count((xa & gb) ^ (xb & ga)) & np.uint8(1)
    weights = np.left_shift(np.int64(1), np.arange(len(gens), dtype=np.int64))
    return bits.astype(np.int64) @ weights if len(gens) else np.zeros(len(strings), np.int64)
