# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_kernels_py`` exactly."""

import numpy as np
from libc.stdint cimport uint64_t, int64_t

ctypedef fused scalar:
    double
    double complex


cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil


cdef void _fwht_rows(scalar[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t rows = v.shape[0], size = v.shape[1]
    cdef Py_ssize_t r, h, i, j
    cdef scalar lo, hi
    for r in range(rows):
        h = 1
        while h < size:
            i = 0
            while i < size:
                for j in range(i, i + h):
                    lo = v[r, j]
                    hi = v[r, j + h]
                    v[r, j] = lo + hi
                    v[r, j + h] = lo - hi
                i += 2 * h
            h *= 2


def fwht(vec):
    """Unnormalized Walsh-Hadamard transform along the last axis, in place."""
    assert vec.flags.c_contiguous
    cdef double[:, ::1] real_rows
    cdef double complex[:, ::1] complex_rows
    flat = vec.reshape(-1, vec.shape[vec.ndim - 1])
    if flat.dtype == np.float64:
        real_rows = flat
        _fwht_rows(real_rows)
    elif flat.dtype == np.complex128:
        complex_rows = flat
        _fwht_rows(complex_rows)
    else:
        raise TypeError("fwht expects float64 or complex128")
    return vec


cdef double complex _ipow(int e) noexcept nogil:
    e = e & 3
    if e == 0:
        return 1.0
    if e == 1:
        return 1j
    if e == 2:
        return -1.0
    return -1j


def pauli_coefficients(mat):
    """Return Tr(sigma_x M)/2^n for every packed x, as a complex 4^n vector."""
    cdef double complex[:, ::1] m = np.ascontiguousarray(mat, dtype=np.complex128)
    cdef Py_ssize_t dim = m.shape[0]
    cdef int n = (<object>dim).bit_length() - 1
    out = np.empty((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] g = out
    cdef Py_ssize_t a, k, b
    cdef double scale = 1.0 / dim
    with nogil:
        for a in range(dim):
            for k in range(dim):
                g[a, k] = m[k, k ^ a]
        _fwht_rows[complex](g)
        for a in range(dim):
            for b in range(dim):
                g[a, b] = g[a, b] * _ipow(popcount64(a & b)) * scale
    return out.reshape(-1)


def pauli_synthesize(coeffs, int n):
    """Inverse of ``pauli_coefficients``: the matrix sum_x c_x sigma_x."""
    cdef Py_ssize_t dim = 1 << n
    w_arr = np.array(coeffs, dtype=np.complex128).reshape(dim, dim)
    cdef double complex[:, ::1] w = w_arr
    out = np.empty((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t a, b, k
    with nogil:
        for a in range(dim):
            for b in range(dim):
                w[a, b] = w[a, b] * _ipow(popcount64(a & b))
        _fwht_rows[complex](w)
        for a in range(dim):
            for k in range(dim):
                o[k ^ a, k] = w[a, k]
    return out


def symplectic_syndromes(strings, gens, int n):
    """Bucket labels: bit j of the result is [x, gens[j]]."""
    cdef uint64_t[::1] xs = np.ascontiguousarray(strings, dtype=np.uint64)
    cdef uint64_t[::1] gs = np.ascontiguousarray(gens, dtype=np.uint64)
    out = np.zeros(xs.shape[0], dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t mask = (<uint64_t>1 << n) - 1
    cdef Py_ssize_t i, j
    cdef uint64_t xa, xb
    cdef int64_t acc
    with nogil:
        for i in range(xs.shape[0]):
            xa = xs[i] >> n
            xb = xs[i] & mask
            acc = 0
            for j in range(gs.shape[0]):
                if popcount64((xa & (gs[j] & mask)) ^ (xb & (gs[j] >> n))) & 1:
                    acc |= (<int64_t>1) << j
            o[i] = acc
    return out
