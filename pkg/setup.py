"""Build script: compiles the optional orbit kernel extension.

The package is fully functional without the extension (a pure-Python twin
is selected at import time); set CTYPELAB_NO_EXT=1 to skip compilation.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CTYPELAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ctypelab._kernel",
                    ["src/ctypelab/_kernel.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
