"""Build the optional Cython kernels.

The extension is marked optional: if Cython or a C compiler is missing the
package still installs and runs on the pure-Python kernels.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TARTHRESH_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "tarthresh._kernels",
            ["src/tarthresh/_kernels.pyx"],
            # keep a*x + b un-fused so results match the Python fallback bit for bit
            extra_compile_args=["-O2", "-ffp-contract=off"],
            optional=True,
        )
        ext_modules = cythonize([ext], language_level=3, quiet=True)

setup(ext_modules=ext_modules)
