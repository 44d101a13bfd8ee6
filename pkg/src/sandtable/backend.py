"""Kernel backend selection.

The compiled extension ``sandtable._kernels`` is used when importable;
otherwise (or with ``SANDTABLE_BACKEND=python``) the numpy fallback is used.
"""

from __future__ import annotations

import os

from . import _fallback

NAME = "python"
kernels = _fallback

if os.environ.get("SANDTABLE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        NAME = "cython"


def get(name: str | None = None):
    """Kernel module by name (``"cython"``, ``"python"``) or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def threads() -> int:
    """Worker cap from ``SANDTABLE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SANDTABLE_THREADS", "1")))
    except ValueError:
        return 1
