"""Build hook for the optional Cython kernels.

Metadata lives in pyproject.toml. When Cython or a compiler is unavailable
the package installs without the extension and uses the NumPy fallback.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("PONDEROMOTIVE_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ponderomotive._kernels._ckernels",
                    ["src/ponderomotive/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
