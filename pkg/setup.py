"""Build the optional Cython kernel.

The package works without it: ``novikov._backend`` falls back to the NumPy
implementation in ``novikov._kernels_py`` when the extension is missing.

    pip install -e . --no-build-isolation
"""

import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        name="novikov._kernels",
        sources=["src/novikov/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # no fast-math or FMA contraction: results must match the NumPy fallback bit for bit
        extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"] if os.name != "nt" else [],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    ),
)
