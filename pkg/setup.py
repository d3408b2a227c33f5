import os

from setuptools import Extension, setup

PYX = os.path.join("src", "freefall", "kernels", "_native.pyx")

extensions = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [Extension("freefall.kernels._native", [PYX], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # Pure-python kernels are selected at import when the extension is absent.
        extensions = []

setup(ext_modules=extensions)
