# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: int64 cyclic convolution and the U^2 quadruple sum.

The int64 convolution is only called by the dispatcher for inputs whose
exact result provably fits in int64; larger inputs are handled by limb
splitting or by the pure big-integer path.
"""

from libc.stdlib cimport calloc, free

NAME = "cython"


def convolve_cyclic_int64(long long[::1] a, long long[::1] b):
    """Exact cyclic convolution; caller guarantees no int64 overflow."""
    cdef Py_ssize_t n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    cdef long long* out = <long long*> calloc(n, sizeof(long long))
    if out is NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j, k
    cdef long long ai
    try:
        for i in range(n):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(n):
                k = i + j
                if k >= n:
                    k -= n
                out[k] += ai * b[j]
        return [out[i] for i in range(n)]
    finally:
        free(out)


def u2_fourth_power(double[::1] values):
    """(1/m^3) * sum_{x,h,k} f(x) f(x+h) f(x+k) f(x+h+k) for real f on Z/m."""
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t x, h, k, xh, xk, xhk
    cdef double total = 0.0, s
    for h in range(m):
        for k in range(m):
            s = 0.0
            for x in range(m):
                xh = x + h
                if xh >= m:
                    xh -= m
                xk = x + k
                if xk >= m:
                    xk -= m
                xhk = xh + k
                if xhk >= m:
                    xhk -= m
                s += values[x] * values[xh] * values[xk] * values[xhk]
            total += s
    return total / (<double> m * <double> m * <double> m)
