"""Build the optional compiled F_p kernel; the package works without it."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(["src/siltkit/_fp_fast.pyx"], language_level=3, quiet=True)
except Exception as exc:  # noqa: BLE001 - any build failure falls back to the pure kernel
    print(f"siltkit: building without the compiled kernel ({exc})")

setup(ext_modules=ext_modules)
