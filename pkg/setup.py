"""Build shim for the optional Cython scan kernel.

The package is pure Python plus one accelerator extension
(cskprobe._ac._scan_cy). If Cython or a C compiler is unavailable the
installation still succeeds and the pure-Python scanner is used at import
time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cskprobe._ac._scan_cy",
                ["src/cskprobe/_ac/_scan_cy.pyx"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
