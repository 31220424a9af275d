"""Build script for the optional native rendering kernels.

The package works without the extension (a pure NumPy backend is selected
at import time), so a missing compiler or Cython only costs speed.
"""

import numpy
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "platesynth.kernels._native",
        ["src/platesynth/kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # FMA contraction must stay off: the pure NumPy backend is the
        # reference and float64 results are compared bit for bit.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3) if cythonize else [],
)
