"""Build script for the optional compiled kernel core.

The package works without the extension: if the build fails (no compiler,
no Cython), installation proceeds and the pure-numpy kernels are used.
"""

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "sfista._kernels._core",
                ["src/sfista/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception:
    extensions = []

setup(ext_modules=extensions)
