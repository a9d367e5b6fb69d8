import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("rainbow_sts._ckernels", ["src/rainbow_sts/_ckernels.pyx"],
                   include_dirs=[numpy.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
