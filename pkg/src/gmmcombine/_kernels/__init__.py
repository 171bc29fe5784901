"""Kernel backend selection.

The compiled extension is preferred when present; the NumPy reference
implementation is used otherwise. Set the environment variable
``GMMCOMBINE_PURE_PYTHON=1`` to force the NumPy backend (the benchmark
uses this to compare the two).
"""

import os

from . import reference

if os.environ.get("GMMCOMBINE_PURE_PYTHON"):
    _impl = reference
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = reference
        BACKEND = "python"

logsumexp = _impl.logsumexp
sum_rows = _impl.sum_rows
log_linear_moments = _impl.log_linear_moments

__all__ = ["BACKEND", "logsumexp", "sum_rows", "log_linear_moments", "reference"]
