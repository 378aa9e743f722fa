# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernel; accumulation order matches the numpy fallback exactly."""
from cython.parallel cimport prange


def apply_stencil(double[:, :, ::1] W, double[:, ::1] u, double[:, ::1] out, int threads=1):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    if threads < 1:
        threads = 1
    for i in prange(1, nx - 1, nogil=True, num_threads=threads, schedule="static"):
        for j in range(1, ny - 1):
            acc = W[0, i, j] * u[i, j]
            acc = acc + W[1, i, j] * u[i + 1, j]
            acc = acc + W[2, i, j] * u[i - 1, j]
            acc = acc + W[3, i, j] * u[i, j + 1]
            acc = acc + W[4, i, j] * u[i, j - 1]
            acc = acc + W[5, i, j] * u[i + 1, j + 1]
            acc = acc + W[6, i, j] * u[i + 1, j - 1]
            acc = acc + W[7, i, j] * u[i - 1, j + 1]
            acc = acc + W[8, i, j] * u[i - 1, j - 1]
            out[i - 1, j - 1] = acc
    return out
