import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernels are optional: if the build fails the package falls
# back to the numpy implementations in jndladder._kernels._numpy.
extensions = [
    Extension(
        "jndladder._kernels._core",
        ["src/jndladder/_kernels/_core.pyx"],
        extra_compile_args=["-O3"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
