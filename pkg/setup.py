# Builds the optional compiled kernels. The package works without them
# (shormagic.kernels falls back to the numpy implementations), so any
# failure to cythonize or compile must not break the install.
import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/shormagic/_kernels.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"warning: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
