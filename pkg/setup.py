"""Build the optional compiled kernels.

The extension is marked optional: when Cython or a C compiler is missing the
package installs anyway and ``thinfilm.kernels`` falls back to numpy.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "thinfilm.kernels._ckernels",
                ["src/thinfilm/kernels/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
