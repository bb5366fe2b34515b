"""Kernel backend selection.

Imports the compiled extension when available and falls back to the pure
numpy/Python implementation otherwise.  Set ``ABGARCH_FORCE_PYTHON=1`` in the
environment to force the fallback (used by the benchmark and the
equivalence tests).
"""

import os

from . import _kernels_py

if os.environ.get("ABGARCH_FORCE_PYTHON", "") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
garch_filter = _impl.garch_filter
biv_filter = _impl.biv_filter
dcc_path = _impl.dcc_path
biv_sim = _impl.biv_sim

__all__ = ["BACKEND", "garch_filter", "biv_filter", "dcc_path", "biv_sim",
           "python_kernels"]


def python_kernels():
    """The fallback module, importable regardless of the active backend."""
    return _kernels_py
