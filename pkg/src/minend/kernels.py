"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting the environment
variable ``MINEND_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("MINEND_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

ESCAPED = _pykernels.ESCAPED
CIRCLE = _pykernels.CIRCLE
STAGNANT = _pykernels.STAGNANT
BREAKDOWN = _pykernels.BREAKDOWN

polyline_curvature = _impl.polyline_curvature
trace_level_curve = _impl.trace_level_curve
develop_frames = _impl.develop_frames


def backends():
    """Available kernel modules keyed by name (for equivalence tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
