import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back at import
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "homeledger._core",
                ["src/homeledger/_core.pyx"],
                include_dirs=[np.get_include()],
                libraries=["crypto"],
                extra_compile_args=["-O3", "-ffp-contract=off", "-Wno-deprecated-declarations"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
