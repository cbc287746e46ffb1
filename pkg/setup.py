"""Optional build of the compiled forward-kinematics kernel.

The package works without the extension (a numpy fallback is selected at
import time); failures here downgrade to a pure-Python install.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "dancedesk._kernels._fk_cy",
                ["src/dancedesk/_kernels/_fk_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"dancedesk: building without compiled FK kernel ({exc})\n")

setup(ext_modules=ext_modules)
