"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed.  -ffp-contract=off keeps
the C kernels bit-identical to the Python reference: fused multiply-adds
would round differently.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fixedlab._core.cykernels",
                ["src/fixedlab/_core/cykernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:  # Cython or numpy missing: pure-Python install
    sys.stderr.write(f"fixedlab: skipping compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
