"""Backend selection for the monodromy path sum.

The compiled Cython kernel is used when it was built; otherwise, or when
``U1ABA_PURE_PYTHON=1`` is set, the numpy implementation is used.
"""
from __future__ import annotations

import os

from . import _pathsum_py

python_path_sum = _pathsum_py.path_sum

try:
    from ._kernels import path_sum as compiled_path_sum
except ImportError:  # extension not built
    compiled_path_sum = None

if compiled_path_sum is not None and os.environ.get("U1ABA_PURE_PYTHON", "") in ("", "0"):
    path_sum = compiled_path_sum
    BACKEND = "cython"
else:
    path_sum = python_path_sum
    BACKEND = "python"

__all__ = ["path_sum", "python_path_sum", "compiled_path_sum", "BACKEND"]
