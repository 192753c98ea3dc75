"""Build script.

The compiled kernel extension is optional: when Cython (or a C compiler) is
missing the package installs anyway and falls back to the pure-Python kernels
at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/contfiber/_kernels/_ckernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.extra_compile_args = ["-O3"]
except Exception:
    # No Cython toolchain; pure-Python fallback will be used.
    ext_modules = []

setup(ext_modules=ext_modules)
