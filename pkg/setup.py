"""Optional Cython build for the polynomial kernels.

If Cython or a compiler is missing the package still installs and falls back
to the pure-Python kernels at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/poissonlr/_ckernels.pyx"],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"poissonlr: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
