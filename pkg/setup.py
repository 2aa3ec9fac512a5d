"""Build script for the optional Cython trajectory kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes trajectory integration faster.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qpilot._kernels._traj_cy",
                ["src/qpilot/_kernels/_traj_cy.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
