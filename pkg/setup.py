import os
import sys
import warnings

from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the C core if we can; fall back to the pure-python kernels if not."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as err:
            self._warn(err)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as err:
            self._warn(err)

    def _warn(self, err):
        warnings.warn(
            "building the compiled stdpp core failed (%s); "
            "falling back to the pure-python kernels, which are slower "
            "but numerically identical" % (err,)
        )


def make_extensions():
    if os.environ.get("STDPP_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("numpy/Cython not available at build time; "
                      "installing with the pure-python kernels only")
        return []
    ext = Extension(
        "stdpp._ckern",
        ["src/stdpp/_ckern.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"] if sys.platform != "win32" else [],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
