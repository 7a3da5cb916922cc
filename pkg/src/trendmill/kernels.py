"""Kernel backend selection.

The compiled extension is used when importable; set ``TRENDMILL_PURE=1`` to
force the numpy fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("TRENDMILL_PURE"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

TIE_RTOL = _kernels_py.TIE_RTOL


def best_split(X: np.ndarray, y: np.ndarray, idx: np.ndarray, min_leaf: int):
    return _impl.best_split(X, y, np.ascontiguousarray(idx, dtype=np.intp), int(min_leaf))


def outside_charset_mask(values: np.ndarray, allowed: str) -> np.ndarray:
    return _impl.outside_charset_mask(list(values), allowed)


def predict_rows(feature, threshold, left, right, value, X: np.ndarray) -> np.ndarray:
    return _impl.predict_rows(feature, threshold, left, right, value,
                              np.ascontiguousarray(X, dtype=np.float64))
