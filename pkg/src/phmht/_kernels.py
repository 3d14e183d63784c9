"""Select the compiled reduction kernel, falling back to pure Python.

Set ``PHMHT_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _reduce_py

BACKEND = "python"
reduce_columns = _reduce_py.reduce_columns

if not os.environ.get("PHMHT_PURE_PYTHON"):
    try:
        from ._reduce import reduce_columns  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass
