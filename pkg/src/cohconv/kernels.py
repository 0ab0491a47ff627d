"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise the numpy fallback.
Set ``COHCONV_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("COHCONV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def backends():
    """Mapping of available backend name to kernel module."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return out
    out["cython"] = compiled
    return out


sorted_tails = _impl.sorted_tails
weighted_min_sums = _impl.weighted_min_sums
phase1_simplex = _impl.phase1_simplex
