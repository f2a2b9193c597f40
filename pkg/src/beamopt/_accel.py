"""JIT switch for the hot kernels.

Kernels are written once as plain Python loops and compiled with numba when
it is available. Setting ``BEAMOPT_DISABLE_JIT=1`` in the environment before
import selects the vectorised numpy implementations instead; both paths are
kept bit-compatible on the integer hashing and agree to rounding on the
floating-point side.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def jit_requested() -> bool:
    return os.environ.get("BEAMOPT_DISABLE_JIT", "").strip().lower() not in _TRUTHY


USE_JIT = HAVE_NUMBA and jit_requested()


def njit(*args, **kwargs):
    """``numba.njit`` with caching and GIL release on by default.

    Falls back to returning the function unchanged when numba is missing, so
    the loop kernels stay importable (and testable, slowly) without it.
    """
    bare = len(args) == 1 and callable(args[0]) and not kwargs
    if not HAVE_NUMBA:
        return args[0] if bare else (lambda fn: fn)

    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if bare:
        return numba.njit(**kwargs)(args[0])
    return numba.njit(*args, **kwargs)


def backend_name() -> str:
    return "numba" if USE_JIT else "numpy"
