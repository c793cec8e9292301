# Build with: python3 setup.py build_ext --inplace
# The extension is optional; without a compiler the numpy kernel is used.
import os

from setuptools import setup

ext_modules = []
if os.environ.get("RIS_OUTAGE_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "ris_outage._kernels",
                    ["src/ris_outage/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
