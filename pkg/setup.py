import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; gyrosim falls back to numpy kernels
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("GYROSIM_NO_EXT"):
    ext_modules = cythonize(
        [Extension("gyrosim._kernels", ["src/gyrosim/_kernels.pyx"], extra_compile_args=["-O3", "-fcx-limited-range"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
