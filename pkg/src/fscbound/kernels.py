"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set FSCBOUND_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _pykernels

INIT_GOOD = _pykernels.INIT_GOOD
INIT_BAD = _pykernels.INIT_BAD
INIT_STATIONARY = _pykernels.INIT_STATIONARY

_compiled = None
if os.environ.get("FSCBOUND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
backend = "cython" if _compiled is not None else "python"

accumulate_scores = _impl.accumulate_scores
sample_chains = _impl.sample_chains
decode_batch = _impl.decode_batch


def available_backends():
    """Mapping name -> module for every backend importable here."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels

            out["cython"] = _kernels
        except ImportError:
            pass
    return out
