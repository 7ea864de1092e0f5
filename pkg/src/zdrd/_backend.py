"""Numba availability and backend selection.

Hot kernels ship in two variants: a plain-NumPy/Python implementation and,
when numba is importable, an ``@njit``-compiled twin of the same function.
The compiled path is the default; set the environment variable
``ZDRD_DISABLE_NUMBA=1`` (before import) to force the pure-NumPy fallback,
or call :func:`zdrd.kernels.set_backend` at runtime.
"""

import os

try:
    from numba import njit  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay usable
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def env_disabled() -> bool:
    return os.environ.get("ZDRD_DISABLE_NUMBA", "").strip().lower() in {
        "1",
        "true",
        "yes",
        "on",
    }


def default_backend() -> str:
    return "numba" if (HAVE_NUMBA and not env_disabled()) else "numpy"
