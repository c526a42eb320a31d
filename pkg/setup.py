"""Build script: compiles the optional Cython kernel extension.

If Cython or a C compiler is unavailable the build still succeeds and the
package falls back to the pure-Python kernels at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/cml/_ckernels.pyx"],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.extra_compile_args.append("-O3")
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"cml: skipping compiled kernels ({exc}); pure-Python fallback will be used\n")

setup(ext_modules=ext_modules)
