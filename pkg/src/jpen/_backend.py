"""Pick the kernel implementation at import time.

The compiled extension is preferred. Set ``JPEN_PURE_PYTHON=1`` to force
the NumPy fallback (useful for debugging and for the backend benchmark).
"""
import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if not os.environ.get("JPEN_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def available_backends():
    """Return a mapping of backend name to kernel module."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return out
    out["cython"] = compiled
    return out
