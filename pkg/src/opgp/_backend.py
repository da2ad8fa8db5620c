"""Select the kernel-loop backend at import time.

The compiled Cython module is preferred; setting the environment variable
``OPGP_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _core_py

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("OPGP_PURE_PYTHON"):
    core = _compiled
    BACKEND = "cython"
else:
    core = _core_py
    BACKEND = "python"


def available_backends():
    """Map backend name to module for every backend importable here."""
    out = {"python": _core_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
