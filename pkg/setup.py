"""Build the optional compiled kernels.

The package works without them: ``ghostdiff.kernels`` falls back to the
numpy implementations when ``ghostdiff._ckernels`` cannot be imported.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - no Cython, pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ghostdiff._ckernels",
                ["src/ghostdiff/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                libraries=["m"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
