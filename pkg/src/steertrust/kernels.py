"""Backend selection for the hot kernels.

The compiled Cython extension is used when it imports; otherwise the numpy
fallback is used. Set ``STEERTRUST_BACKEND=python`` to force the fallback
(``compiled`` makes a missing extension an error).
"""
import os

from . import _kernels_py

_requested = os.environ.get("STEERTRUST_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _kernels_py
        BACKEND = "python"

calibrate_angles = _impl.calibrate_angles
fact1_statistics = _impl.fact1_statistics
strategy_values = _impl.strategy_values


def implementations():
    """Map backend name to module for every backend that imports."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["compiled"] = _kernels
    except ImportError:
        pass
    return found
