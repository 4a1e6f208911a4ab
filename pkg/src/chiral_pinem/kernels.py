"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy versions.
Set ``CHIRAL_PINEM_PURE_PYTHON=1`` to force the numpy path.
"""
import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("CHIRAL_PINEM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using numpy fallback")
    else:
        _impl = _compiled
        BACKEND = "cython"

bessel_j_ladder = _impl.bessel_j_ladder
sideband_stack = _impl.sideband_stack
ring_sample = _impl.ring_sample


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        pass
    else:
        found["cython"] = compiled
    return found
