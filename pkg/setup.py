"""Build script: compiles the flow-solver kernel as a C extension.

If Cython (or a C compiler) is unavailable the package still installs;
the pure-Python kernel is selected automatically at import time.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("scoi._kernels._core", ["src/scoi/_kernels/_core.pyx"])],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
