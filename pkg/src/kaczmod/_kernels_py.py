"""Numpy fallback for the hot scalar recursions.

Same contracts as the compiled module `_kernels`; the sequential inversion
loop is the only part that benefits from compilation, so the fallback keeps
it as a Python-level loop over numpy dot products.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def invert_power_series(moments: np.ndarray) -> np.ndarray:
    """Coefficients of the reciprocal power series, truncated like the input.

    Requires moments[0] == 1; c[0] = 1 and
    c[n] = -sum_{k<n} c[k] * moments[n-k].
    """
    m = np.ascontiguousarray(moments, dtype=np.complex128)
    if m.ndim != 1 or m.size == 0:
        raise ValueError("moments must be a nonempty 1-d array")
    if m[0] != 1.0 + 0.0j:
        raise ValueError("moments[0] must be exactly 1")
    n_max = m.size - 1
    c = np.zeros(n_max + 1, dtype=np.complex128)
    c[0] = 1.0
    for n in range(1, n_max + 1):
        c[n] = -np.dot(c[:n], m[n:0:-1])
    return c


def triangular_convolve(a: np.ndarray, b: np.ndarray, n_max: int) -> np.ndarray:
    """First n_max+1 coefficients of the product series a * b."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("operands must be 1-d arrays")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = np.convolve(a[: n_max + 1], b[: n_max + 1])[: n_max + 1]
    if out.size < n_max + 1:
        out = np.pad(out, (0, n_max + 1 - out.size))
    return np.ascontiguousarray(out, dtype=np.complex128)
