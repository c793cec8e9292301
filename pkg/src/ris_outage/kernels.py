"""Backend selection for the Monte Carlo trial kernel.

The compiled extension is used when it imports; ``RIS_OUTAGE_PURE=1`` forces
the numpy fallback.
"""

import os

from . import _kernels_py

BACKENDS = {"numpy": _kernels_py}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

if _compiled is not None and os.environ.get("RIS_OUTAGE_PURE", "") not in ("1", "true", "yes"):
    active = _compiled
else:
    active = _kernels_py

BACKEND = active.BACKEND


def get(name=None):
    """Kernel module by name; ``None`` gives the import-time default."""
    if name is None:
        return active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
