"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy implementations
when the extension is missing or when KACZMOD_PURE_PYTHON is set. Both
backends expose the same functions with identical numerics up to float
reassociation, which `tests/test_kernels.py` pins down.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("KACZMOD_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
invert_power_series = _impl.invert_power_series
triangular_convolve = _impl.triangular_convolve
