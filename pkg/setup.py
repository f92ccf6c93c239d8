"""Build script for the compiled simulation core.

The Cython extension is optional: if it cannot be built, the package
installs anyway and falls back to the pure-numpy kernels in
``tclfleet._core.pure``. Set TCLFLEET_NO_EXT=1 to skip the extension
deliberately.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TCLFLEET_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tclfleet._core._kernels",
                    ["src/tclfleet/_core/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
