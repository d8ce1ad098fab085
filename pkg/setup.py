"""Build script for the optional compiled event-loop kernel.

The simulator works without the extension (a pure-Python engine is selected
at import time), so a missing compiler or Cython only costs speed. Set
HASHALLOC_DISABLE_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("HASHALLOC_DISABLE_EXT") == "1":
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    # The numpy scalar distributions (standard normal / exponential) live in
    # a static library shipped with numpy; linking it lets the kernel consume
    # the same PCG64 stream as numpy.random.Generator, bit for bit.
    npyrandom_dir = os.path.join(os.path.dirname(np.__file__), "random", "lib")
    ext = Extension(
        "hashalloc._kernel",
        sources=["src/hashalloc/_kernel.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions())
