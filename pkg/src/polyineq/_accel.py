"""Numba switch.

Set ``POLYINEQ_DISABLE_NUMBA=1`` to force the pure-numpy kernels; this is also
the fallback when numba cannot be imported.
"""

import os

ENV_FLAG = "POLYINEQ_DISABLE_NUMBA"

_disabled = os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")

NUMBA_AVAILABLE = False
if not _disabled:
    try:
        from numba import njit as _njit

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - numba is a hard dep in CI
        NUMBA_AVAILABLE = False


def jit(func):
    """Compile ``func`` with ``njit(cache=True)`` when numba is enabled.

    Returns ``None`` otherwise so callers can pick the numpy twin.
    """
    if not NUMBA_AVAILABLE:
        return None
    return _njit(cache=True, nogil=True)(func)
