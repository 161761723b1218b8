"""Tabulation kernels with a compiled fast path.

The Cython extension `_fast` is preferred when importable; the NumPy
module `_ref` is the always-available fallback. Set RDMIX_PURE_PYTHON=1
to force the fallback (used by the backend-equivalence tests and the
benchmark).
"""

import os

from . import _ref

if os.environ.get("RDMIX_PURE_PYTHON", "") not in ("", "0"):
    _impl = _ref
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND
dubiner_tab = _impl.dubiner_tab
legendre_tab = _impl.legendre_tab
n_scalar = _ref.n_scalar
