import os

import numpy as np
from setuptools import Extension, setup

ext = []
if not os.environ.get("SINGDRIFT_NO_EXT"):
    from Cython.Build import cythonize

    ext = cythonize([Extension("singdrift.simulate._kernels", ["src/singdrift/simulate/_kernels.pyx"],
                               include_dirs=[np.get_include()],
                               extra_compile_args=["-O2", "-ffp-contract=off"])],
                    compiler_directives={"language_level": 3})

setup(ext_modules=ext)
