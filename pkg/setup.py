import os

from setuptools import Extension, setup

# The compiled kernel is optional: LABELFORGE_SKIP_EXT=1 (or a missing
# compiler toolchain) leaves the pure-Python fallback in charge.
ext_modules = []
if os.environ.get("LABELFORGE_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("labelforge._ckernel", ["src/labelforge/_ckernel.pyx"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
