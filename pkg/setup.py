from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("birkhoff._kernels", ["src/birkhoff/_kernels.pyx"],
                   extra_compile_args=["-O3", "-fcx-limited-range"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
