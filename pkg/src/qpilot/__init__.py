"""Quantum foundations toolkit: finite-dimensional states, hidden-variable
model auditing, a 1D pilot-wave engine and Bell/CHSH verification."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
