# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: fast Walsh-Hadamard transform and parity tables."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def fwht(double[::1] a):
    """Unnormalized in-place Walsh-Hadamard transform of a length-2^n array."""
    cdef Py_ssize_t size = a.shape[0]
    cdef Py_ssize_t half = 1, start, i
    cdef double u, v
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    while half < size:
        start = 0
        while start < size:
            for i in range(start, start + half):
                u = a[i]
                v = a[i + half]
                a[i] = u + v
                a[i + half] = u - v
            start += 2 * half
        half *= 2


def parity_vector(unsigned long long mask, int n):
    """Truth table of chi_mask over all 2^n inputs as int8 +-1."""
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    cdef cnp.ndarray[cnp.int8_t, ndim=1] out = np.empty(size, dtype=np.int8)
    cdef cnp.int8_t[::1] view = out
    cdef unsigned long long x
    for x in range(<unsigned long long>size):
        view[x] = -1 if __builtin_popcountll(mask & x) & 1 else 1
    return out


def parity_batch(const cnp.uint64_t[::1] masks, const cnp.uint64_t[::1] xs):
    """chi_{masks[i]}(xs[i]) elementwise as int8 +-1."""
    cdef Py_ssize_t count = masks.shape[0], i
    if xs.shape[0] != count:
        raise ValueError("masks and xs must have equal length")
    cdef cnp.ndarray[cnp.int8_t, ndim=1] out = np.empty(count, dtype=np.int8)
    cdef cnp.int8_t[::1] view = out
    for i in range(count):
        view[i] = -1 if __builtin_popcountll(masks[i] & xs[i]) & 1 else 1
    return out
