"""Build shim: compiles the optional Cython kernel backend.

The package works without the extension (helikon.kernels falls back to the
pure-Python backend), so any build failure here is demoted to a warning.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            print(f"warning: skipping Cython backend build: {exc}", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(
                f"warning: could not build {ext.name}; using the pure-Python"
                f" kernels ({exc})",
                file=sys.stderr,
            )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not installed; pure-Python kernels only",
              file=sys.stderr)
        return []
    from setuptools import Extension

    return cythonize(
        [
            Extension(
                "helikon._kernels_cy",
                ["src/helikon/_kernels_cy.pyx"],
            )
        ],
        language_level=3,
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
