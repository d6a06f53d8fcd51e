"""Build script for the optional compiled Viterbi kernel.

The package is pure Python plus one Cython extension for the decoder's
add-compare-select loop. If Cython or a C compiler is unavailable the
extension is skipped and rofa._kernels falls back to the numpy
implementation at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rofa._kernels._viterbi",
                sources=["src/rofa/_kernels/_viterbi.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
