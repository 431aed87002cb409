"""Backend selection for the decoder hot loops.

The compiled extension is used when importable; set ``NOISYGT_PURE_PYTHON=1``
to force the reference implementation.
"""

import os
from types import ModuleType

from . import _pykernels

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("NOISYGT_PURE_PYTHON", "") != "1":
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]
distinctive_sets = _impl.distinctive_sets
spog_classify = _impl.spog_classify


def get(name: str) -> ModuleType:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
