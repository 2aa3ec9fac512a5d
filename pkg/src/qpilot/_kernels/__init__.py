"""Trajectory kernel backend selection.

The compiled Cython kernel is preferred; the NumPy fallback gives identical
results (bit-for-bit) and is used when the extension was not built.  Set
QPILOT_FORCE_PY_KERNEL=1 to force the fallback.
"""

import os

from . import _traj_py

if os.environ.get("QPILOT_FORCE_PY_KERNEL") == "1":
    BACKEND = "python"
    advance_samples = _traj_py.advance_samples
else:
    try:
        from ._traj_cy import advance_samples

        BACKEND = "cython"
    except ImportError:
        BACKEND = "python"
        advance_samples = _traj_py.advance_samples

__all__ = ["advance_samples", "BACKEND"]
