"""Backend selection for the numerical core.

A compiled extension (built from ``_fastfun.pyx``) accelerates the scalar
transcendental loops.  Import falls back to the numpy implementation when the
extension is unavailable, and ``POSSIO_PURE=1`` in the environment forces the
fallback regardless.
"""
import os

from . import _purefun

if os.environ.get("POSSIO_PURE", "") == "1":
    _backend = _purefun
else:
    try:
        from . import _fastfun as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _purefun

BACKEND_NAME: str = _backend.BACKEND_NAME

import numpy as _np


def hankel_pair_raw(z):
    """Vectorized H0^(1), H1^(1) over a 1-D complex array.

    Returns (h0, h1, branch) where branch is a uint8 code per point.
    """
    z = _np.ascontiguousarray(z, dtype=_np.complex128)
    h0 = _np.empty(z.shape, dtype=_np.complex128)
    h1 = _np.empty(z.shape, dtype=_np.complex128)
    branch = _np.empty(z.shape, dtype=_np.uint8)
    _backend.hankel_pair(z, h0, h1, branch)
    return h0, h1, branch


def h1reg_raw(z):
    """Vectorized H1^(1)(z) + 2i/(pi z) over a 1-D complex array."""
    z = _np.ascontiguousarray(z, dtype=_np.complex128)
    out = _np.empty(z.shape, dtype=_np.complex128)
    _backend.h1reg(z, out)
    return out


def backend_module():
    return _backend
