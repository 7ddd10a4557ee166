import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled core; the pure-Python kernels take over
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SHARPLIMIT_NO_EXT"):
    ext = Extension(
        "sharplimit.kernels._core",
        ["src/sharplimit/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
