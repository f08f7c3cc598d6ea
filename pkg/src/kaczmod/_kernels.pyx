# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: sequential power-series inversion and truncated
series products. Mirrors `_kernels_py`.

Complex values are processed as interleaved doubles with four independent
accumulators per sum; the split keeps the dependency chain short enough
for the compiler to vectorize, which is where the speedup over the
BLAS-backed fallback comes from.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef inline void _dot4(
    const double* a, const double* b_rev, Py_ssize_t length, double* out
) noexcept nogil:
    """out[0:2] += sum_k a[k] * b_rev[-k] over interleaved complex doubles,
    where b_rev points at the highest-lag coefficient."""
    cdef double s0r = 0, s0i = 0, s1r = 0, s1i = 0
    cdef double s2r = 0, s2i = 0, s3r = 0, s3i = 0
    cdef double ar, ai, br, bi
    cdef Py_ssize_t k = 0, k4 = length - (length & 3)
    while k < k4:
        ar = a[2 * k]; ai = a[2 * k + 1]
        br = b_rev[-2 * k]; bi = b_rev[-2 * k + 1]
        s0r += ar * br - ai * bi; s0i += ar * bi + ai * br
        ar = a[2 * k + 2]; ai = a[2 * k + 3]
        br = b_rev[-2 * k - 2]; bi = b_rev[-2 * k - 1]
        s1r += ar * br - ai * bi; s1i += ar * bi + ai * br
        ar = a[2 * k + 4]; ai = a[2 * k + 5]
        br = b_rev[-2 * k - 4]; bi = b_rev[-2 * k - 3]
        s2r += ar * br - ai * bi; s2i += ar * bi + ai * br
        ar = a[2 * k + 6]; ai = a[2 * k + 7]
        br = b_rev[-2 * k - 6]; bi = b_rev[-2 * k - 5]
        s3r += ar * br - ai * bi; s3i += ar * bi + ai * br
        k += 4
    while k < length:
        ar = a[2 * k]; ai = a[2 * k + 1]
        br = b_rev[-2 * k]; bi = b_rev[-2 * k + 1]
        s0r += ar * br - ai * bi; s0i += ar * bi + ai * br
        k += 1
    out[0] += s0r + s1r + s2r + s3r
    out[1] += s0i + s1i + s2i + s3i


def invert_power_series(moments):
    """Coefficients of the reciprocal power series, truncated like the input.

    Requires moments[0] == 1; c[0] = 1 and
    c[n] = -sum_{k<n} c[k] * moments[n-k].
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] m = np.ascontiguousarray(
        moments, dtype=np.complex128)
    if m.ndim != 1 or m.shape[0] == 0:
        raise ValueError("moments must be a nonempty 1-d array")
    if m[0] != 1.0 + 0.0j:
        raise ValueError("moments[0] must be exactly 1")
    cdef Py_ssize_t n_max = m.shape[0] - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.zeros(
        n_max + 1, dtype=np.complex128)
    cdef double* cr = <double*> c.data
    cdef double* mr = <double*> m.data
    cdef double acc[2]
    cdef Py_ssize_t n
    cr[0] = 1.0
    with nogil:
        for n in range(1, n_max + 1):
            acc[0] = 0.0; acc[1] = 0.0
            # sum_{k<n} c[k] * m[n-k]: walk m downward from lag n
            _dot4(cr, mr + 2 * n, n, acc)
            cr[2 * n] = -acc[0]; cr[2 * n + 1] = -acc[1]
    return c


def triangular_convolve(a, b, Py_ssize_t n_max):
    """First n_max+1 coefficients of the product series a * b."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] x = np.ascontiguousarray(
        a, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y = np.ascontiguousarray(
        b, dtype=np.complex128)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("operands must be 1-d arrays")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(
        n_max + 1, dtype=np.complex128)
    cdef Py_ssize_t na = x.shape[0], nb = y.shape[0]
    cdef double* xr = <double*> x.data
    cdef double* yr = <double*> y.data
    cdef double* outr = <double*> out.data
    cdef double acc[2]
    cdef Py_ssize_t n, lo, hi
    with nogil:
        for n in range(n_max + 1):
            lo = n - nb + 1
            if lo < 0:
                lo = 0
            hi = n + 1
            if hi > na:
                hi = na
            if hi <= lo:
                continue
            acc[0] = 0.0; acc[1] = 0.0
            # sum_{k in [lo,hi)} x[k] * y[n-k]
            _dot4(xr + 2 * lo, yr + 2 * (n - lo), hi - lo, acc)
            outr[2 * n] = acc[0]; outr[2 * n + 1] = acc[1]
    return out
