"""Backend selection for the hot kernels.

Prefers the compiled extension (shormagic._kernels, built by setup.py)
and falls back to the numpy twins in _kernels_py. Set SHORMAGIC_PURE=1
to force the pure path, e.g. for benchmarking or debugging.
"""

from __future__ import annotations

import os

import numpy as np

from shormagic import _kernels_py

try:
    from shormagic import _kernels as _compiled
except ImportError:  # extension not built; numpy path covers everything
    _compiled = None

if os.environ.get("SHORMAGIC_PURE"):
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def run_orbit(r, shifts, u, forced=None, trace=False):
    shifts = np.ascontiguousarray(shifts, dtype=np.int64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if forced is not None:
        forced = np.ascontiguousarray(forced, dtype=np.int8)
    if _compiled is not None:
        return _compiled.run_orbit(r, shifts, u, forced, trace)
    return _kernels_py.run_orbit(r, shifts, u, forced, trace)


def xor_pair_lambda(values, width: int) -> int:
    values = np.ascontiguousarray(values, dtype=np.int64)
    if _compiled is not None and width <= 22:
        return _compiled.xor_pair_lambda(values, width)
    return _kernels_py.xor_pair_lambda(values, width)
