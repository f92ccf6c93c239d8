"""Simulation kernel backends.

The compiled Cython core is used when its extension module imported
cleanly; otherwise the pure-numpy implementation takes over. Setting
TCLFLEET_FORCE_PURE=1 in the environment skips the compiled core, which
the benchmark and the cross-backend tests rely on.
"""
from __future__ import annotations

import os

from . import pure as _pure

if os.environ.get("TCLFLEET_FORCE_PURE"):
    _impl = _pure
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND
advance_units = _impl.advance_units
track_signal = _impl.track_signal


def backend_name() -> str:
    """Name of the active kernel backend: "compiled" or "pure"."""
    return BACKEND


def load_backend(name: str):
    """Return a specific backend module regardless of the active one.

    Raises ImportError for "compiled" when the extension is unavailable.
    """
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def set_backend(name: str) -> str:
    """Switch the active kernel; returns the previous backend name."""
    global BACKEND, advance_units, track_signal
    impl = load_backend(name)
    previous = BACKEND
    BACKEND = impl.BACKEND
    advance_units = impl.advance_units
    track_signal = impl.track_signal
    return previous


__all__ = ["BACKEND", "advance_units", "track_signal", "backend_name",
           "load_backend", "set_backend"]
