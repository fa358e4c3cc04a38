"""Kernel backend selection.

Prefers the compiled extension when it imported cleanly; falls back to the
numpy reference implementation otherwise.  Set SLOSHWAVES_PURE=1 to force
the fallback (used by the benchmark and the backend-agreement tests).
"""

import os

from . import reference

if os.environ.get("SLOSHWAVES_PURE", ""):
    _impl = reference
    _BACKEND = "reference"
else:
    try:
        from . import _core as _impl
        _BACKEND = "compiled"
    except ImportError:
        _impl = reference
        _BACKEND = "reference"

pv_subtracted = _impl.pv_subtracted
pv_plain = _impl.pv_plain
midpoint_sweep = _impl.midpoint_sweep


def backend_name():
    """Which kernel implementation is active: 'compiled' or 'reference'."""
    return _BACKEND
