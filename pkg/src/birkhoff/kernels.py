"""Kernel selection: compiled extension when built, pure Python otherwise.

Set ``BIRKHOFF_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("BIRKHOFF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

bracket = _impl.bracket
eval_batch = _impl.eval_batch
eval_jac = _impl.eval_jac

__all__ = ["BACKEND", "bracket", "eval_batch", "eval_jac"]
