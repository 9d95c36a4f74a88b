"""Hot-loop kernels, backed by the compiled extension when it is available.

The compiled module ``qtsp._ckernels`` is preferred; if it is missing (no
compiler at install time) or ``QTSP_PURE_PYTHON=1`` is set, the numpy
implementations in ``qtsp._pykernels`` are used instead. Both expose the
same functions with the same results.
"""

import os

from . import _pykernels

if os.environ.get("QTSP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "compiled" if _impl is not _pykernels else "python"

branch_increments = _impl.branch_increments
tour_lengths = _impl.tour_lengths
enumerate_lengths = _impl.enumerate_lengths
sis_draw = _impl.sis_draw
held_karp = _impl.held_karp
nearest_neighbor = _impl.nearest_neighbor


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["compiled"] = _ckernels
    return found
