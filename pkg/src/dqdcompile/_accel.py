"""Optional numba acceleration.

The hot kernels in :mod:`dqdcompile.kernels` exist twice: a numba ``@njit``
version and a pure-numpy twin. Numba is used when it imports and the
environment variable ``DQDCOMPILE_DISABLE_NUMBA`` is not set to a truthy value;
with the flag set numba is never invoked and only the numpy backend exists.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

ENV_FLAG = "DQDCOMPILE_DISABLE_NUMBA"


def _truthy(value):
    return value.strip().lower() in {"1", "true", "yes", "on"}


NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _truthy(os.environ.get(ENV_FLAG, ""))


def njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)
