import numpy as np
from setuptools import Extension, setup

# The compiled scan kernels are optional: if the extension cannot be built,
# the package falls back to the numpy implementations in _kernels_py.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sirdiff._kernels",
                ["src/sirdiff/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
