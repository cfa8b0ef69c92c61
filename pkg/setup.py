import numpy
from setuptools import setup
from setuptools.extension import Extension

from Cython.Build import cythonize

extensions = cythonize(
    [
        Extension(
            "pathbank.kernels._compiled",
            ["src/pathbank/kernels/_compiled.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )
    ],
    language_level=3,
)

setup(ext_modules=extensions)
