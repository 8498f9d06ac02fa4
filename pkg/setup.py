"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure-numpy fallback is selected
at import time), so any failure here downgrades to a pure-python install
instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "subspec._core",
                ["src/subspec/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover
    print(f"subspec: building without compiled core ({exc})")

setup(ext_modules=ext_modules)
