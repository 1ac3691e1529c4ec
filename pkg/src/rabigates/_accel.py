"""Numba switch.

Set ``RABIGATES_DISABLE_NUMBA=1`` to force the pure-numpy code paths; this is
also what happens when numba cannot be imported.
"""
import os
import warnings

_disabled = os.environ.get("RABIGATES_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _disabled:
        raise ImportError("numba disabled by RABIGATES_DISABLE_NUMBA")
    from numba import njit, prange

    # an outdated system TBB is skipped in favour of OpenMP; the notice is noise
    warnings.filterwarnings("ignore", message="The TBB threading layer")

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap

    prange = range
