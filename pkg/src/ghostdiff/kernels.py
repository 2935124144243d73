"""Backend selection for the hot loops.

The compiled extension is used when it imports; set
``GHOSTDIFF_BACKEND=python`` to force the numpy fallback.
"""
import os
from types import SimpleNamespace

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends():
    return list(_BACKENDS)


def get_backend(name=None):
    """Namespace with ``accumulate_pairs`` and ``fresnel_direct``."""
    if name is None:
        name = BACKEND
    try:
        mod = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}") from None
    return SimpleNamespace(name=name, accumulate_pairs=mod.accumulate_pairs,
                           fresnel_direct=mod.fresnel_direct)


_requested = os.environ.get("GHOSTDIFF_BACKEND", "").strip().lower()
if _requested in _BACKENDS:
    BACKEND = _requested
elif _requested:
    raise ImportError(f"GHOSTDIFF_BACKEND={_requested!r} is not available")
else:
    BACKEND = "cython" if _ckernels is not None else "python"

accumulate_pairs = _BACKENDS[BACKEND].accumulate_pairs
fresnel_direct = _BACKENDS[BACKEND].fresnel_direct
