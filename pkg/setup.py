import ctypes.util
import os
import platform
import sys

import numpy as np
from setuptools import Extension, setup

# CFGEN_NO_EXT=1 builds the pure-Python package only.
ext_modules = []
if not os.environ.get("CFGEN_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available, skipping compiled kernels", file=sys.stderr)
    else:
        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        # glibc's SIMD math library backs the vectorised exp/sin/cos loops in _vecmath.h
        libs = ["m"]
        if sys.platform.startswith("linux") and platform.machine() == "x86_64" and ctypes.util.find_library("mvec"):
            libs.append("mvec")
        ext_modules = cythonize(
            [
                Extension(
                    "cfgen._ckernels",
                    ["src/cfgen/_ckernels.pyx"],
                    include_dirs=[np.get_include(), "src/cfgen"],
                    extra_compile_args=["-O3"] + openmp,
                    extra_link_args=openmp,
                    libraries=libs,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
