"""Build script: compiles the optional native kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); set HYBRIDVO_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("HYBRIDVO_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("hybridvo: Cython/numpy unavailable, building without native kernels")
        return []
    ext = Extension(
        "hybridvo.kernels._native",
        ["src/hybridvo/kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
