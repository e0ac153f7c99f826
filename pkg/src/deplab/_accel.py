"""Numba switch.

Set ``DEPLAB_DISABLE_NUMBA=1`` to route every kernel through its numpy
implementation. Numba being absent has the same effect.
"""

import os

DISABLED = os.environ.get("DEPLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity otherwise.

    The compiled function is produced even when ``DEPLAB_DISABLE_NUMBA`` is set,
    so tests and benchmarks can still compare both paths explicitly.
    """
    if _njit is not None:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
