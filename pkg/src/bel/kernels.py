"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``BEL_PURE_PYTHON=1`` is set, the pure-Python versions are used. Both
expose ``reduce_columns`` and ``lyndon_census`` with identical results.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("BEL_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

reduce_columns = _impl.reduce_columns
lyndon_census = _impl.lyndon_census


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["cython"] = _kernels
    except ImportError:
        pass
    return out


def max_workers() -> int:
    """Worker cap from ``BEL_THREADS`` (default: CPU count)."""
    raw = os.environ.get("BEL_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"BEL_THREADS must be a positive integer, got {raw!r}")
        if n < 1:
            raise ValueError(f"BEL_THREADS must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1
