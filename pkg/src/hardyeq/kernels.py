"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used.  Setting ``HARDYEQ_PURE=1``
forces the numpy path.
"""

import os

from . import _pykernels

if os.environ.get("HARDYEQ_PURE", "") not in ("", "0"):
    backend = _pykernels
else:
    try:
        from . import _ckernels as backend  # type: ignore[no-redef]
    except ImportError:  # extension not built
        backend = _pykernels

BACKEND = backend.NAME


def available_backends() -> dict:
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
