"""Kernel backend selection.

Numba-compiled kernels are used when numba imports cleanly, unless the
environment variable ``MPCTV_DISABLE_NUMBA`` is set to a truthy value.  The
choice can also be flipped at runtime with :func:`use_numba`, which is what the
benchmark and the backend-equivalence tests do.
"""
from __future__ import annotations

import contextlib
import functools
import os

_TRUTHY = {"1", "true", "yes", "on"}

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False
    _njit = None

_enabled = HAVE_NUMBA and os.environ.get("MPCTV_DISABLE_NUMBA", "").strip().lower() not in _TRUTHY


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)

    def deco(f):
        @functools.wraps(f)
        def wrapper(*a, **kw):
            return f(*a, **kw)

        return wrapper

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return deco(args[0])
    return deco


def numba_enabled() -> bool:
    return _enabled


def backend_name() -> str:
    return "numba" if _enabled else "numpy"


def set_numba(flag: bool) -> None:
    global _enabled
    if flag and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _enabled = bool(flag)


@contextlib.contextmanager
def use_numba(flag: bool):
    """Temporarily switch the kernel backend."""
    prev = _enabled
    set_numba(flag)
    try:
        yield
    finally:
        set_numba(prev)
