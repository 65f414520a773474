"""Radial-kernel backend selection: compiled extension or numpy fallback.

The Cython extension is built at install time; if it is missing (source
checkout without a build step) the numpy implementation is used.  Set
``BAROFLOW_KERNEL=numpy`` or ``=cython`` to force a backend; forcing an
unavailable compiled backend raises at import.
"""

import os

from . import _radial_numpy

_choice = os.environ.get("BAROFLOW_KERNEL", "auto")

if _choice == "numpy":
    _impl = _radial_numpy
elif _choice == "cython":
    from . import _radial_cython as _impl
elif _choice == "auto":
    try:
        from . import _radial_cython as _impl
    except ImportError:
        _impl = _radial_numpy
else:
    raise RuntimeError(f"unknown BAROFLOW_KERNEL value {_choice!r}")

BACKEND = _impl.BACKEND
phase_rhs = _impl.phase_rhs

__all__ = ["BACKEND", "phase_rhs"]
