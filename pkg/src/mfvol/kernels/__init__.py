"""Kernel backend selection.

Prefers the compiled Cython extension and falls back to the NumPy
implementation.  Set ``MFVOL_KERNEL=python`` to force the fallback (used by
the benchmark and the backend-equivalence tests).
"""

import os

from . import _native

if os.environ.get("MFVOL_KERNEL", "").lower() == "python":
    _impl = _native
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _native
        BACKEND = "python"

DIST_NORMAL = _native.DIST_NORMAL
DIST_STUDENT_T = _native.DIST_STUDENT_T
DIST_GED = _native.DIST_GED

tgarch_recursion = _impl.tgarch_recursion
tgarch_nll = _impl.tgarch_nll
segment_variances = _impl.segment_variances

__all__ = [
    "BACKEND",
    "DIST_NORMAL",
    "DIST_STUDENT_T",
    "DIST_GED",
    "tgarch_recursion",
    "tgarch_nll",
    "segment_variances",
]
