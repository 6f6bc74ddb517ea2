import os

from setuptools import setup

ext_modules = []
if os.environ.get("HIROTA_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("hirota._sweep", ["src/hirota/_sweep.pyx"],
                       include_dirs=[np.get_include()])],
            language_level=3,
        )
    except ImportError:
        # pure-Python fallback is selected at import time
        ext_modules = []

setup(ext_modules=ext_modules)
