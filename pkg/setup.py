"""Build script for the optional compiled recursion kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time); building it makes likelihood evaluation and long single-path
simulation roughly two orders of magnitude faster.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "abgarch._kernels",
                ["src/abgarch/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
else:
    extensions = []

setup(ext_modules=extensions)
