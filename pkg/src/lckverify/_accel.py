"""Compiled-kernel switch.

Kernels in ``_kernels`` come in pairs: a numba ``@njit`` version and a pure
numpy version.  The numba path is used when numba imports and the environment
variable ``LCKVERIFY_DISABLE_JIT`` is unset or ``0``.
"""

import os

_FLAG = "LCKVERIFY_DISABLE_JIT"


def _jit_requested():
    return os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    import numba as _nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None
    HAVE_NUMBA = False

USE_JIT = HAVE_NUMBA and _jit_requested()


def njit(*args, **kwargs):
    """``numba.njit`` with cache on and fastmath off, or the identity when numba is missing."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("fastmath", False)
    if _nb is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    return _nb.njit(*args, **kwargs)
