import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-numpy install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "e8frodo._core",
                ["src/e8frodo/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-frounding-math", "-fno-fast-math", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
