"""Build the optional compiled core.

The package works without it: ``treegibbs._backend`` falls back to the
pure-NumPy implementation when ``treegibbs._core`` cannot be imported.
"""
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TREEGIBBS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "treegibbs._core",
                    ["src/treegibbs/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
