"""Build script: compiles the optional Cython ODE kernel.

The package is fully functional without the extension (a pure-Python
integrator is selected at import time); the extension is built when
Cython and a C compiler are available.  ``-ffp-contract=off`` keeps the
compiled kernel bit-identical to the Python fallback.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "tfsolve._kernels._ode_cy",
                ["src/tfsolve/_kernels/_ode_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"tfsolve: building without compiled kernel ({exc})")

setup(ext_modules=ext_modules)
