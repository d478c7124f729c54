"""Build script; compiles the optional fast simulator kernel.

The package works without the compiled extension (a numpy fallback is
selected at import time), so a failed Cython/C build downgrades to a
pure-Python install instead of aborting.
"""
import sys

from setuptools import setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError:
        return []
    ext = Extension(
        "ftqopt.revsim._kernel",
        ["src/ftqopt/revsim/_kernel.pyx"],
        include_dirs=[numpy.get_include()],
    )
    try:
        return cythonize([ext], language_level=3)
    except Exception as exc:  # cython parse/codegen failure
        print(f"warning: skipping fast kernel build ({exc})", file=sys.stderr)
        return []


setup(ext_modules=_extensions())
