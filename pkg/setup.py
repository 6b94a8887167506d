"""Build script. The compiled core is optional: if Cython or a C compiler is
missing, the package installs pure and possio._core falls back to numpy."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("POSSIO_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "possio._core._fastfun",
                    sources=["src/possio/_core/_fastfun.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
