import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_args = dict(
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
    extra_link_args=["-fopenmp"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

ext_modules = []
if cythonize is not None and not os.environ.get("SIMPLEXFT_NO_EXT"):
    ext_modules = cythonize(
        [Extension("simplexft._kernels", ["src/simplexft/_kernels.pyx"], **ext_args)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
