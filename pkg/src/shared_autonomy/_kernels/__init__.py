"""Value-iteration sweep kernels.

The compiled extension is preferred when it imported cleanly; the numpy
fallback is always available. Set SHARED_AUTONOMY_KERNELS=python|native to
force a backend (native raises if the extension is missing).
"""
from __future__ import annotations

import os

from . import fallback

_forced = os.environ.get("SHARED_AUTONOMY_KERNELS", "").strip().lower()

if _forced == "python":
    _impl = fallback
elif _forced == "native":
    from . import native as _impl  # raises ImportError if not built
else:
    try:
        from . import native as _impl
    except ImportError:
        _impl = fallback

BACKEND: str = _impl.BACKEND
hard_vi = _impl.hard_vi
soft_vi = _impl.soft_vi


def get_backend(name: str):
    """Return the (hard_vi, soft_vi) pair for an explicit backend name."""
    if name == "python":
        return fallback.hard_vi, fallback.soft_vi
    if name == "native":
        from . import native

        return native.hard_vi, native.soft_vi
    raise ValueError(f"unknown kernel backend {name!r}")
