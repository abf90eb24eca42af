"""Numba/NumPy backend selection.

The hot kernels in `kernels` ship in two variants: a numba ``@njit``
version and a pure-NumPy fallback.  Selection order:

* environment variable ``LQNET_BACKEND`` set to ``numba`` or ``numpy``
  forces that path (``numba`` raises at import time if numba is missing);
* unset or ``auto``: numba when importable, NumPy otherwise.
"""

from __future__ import annotations

import os

_ENV_VAR = "LQNET_BACKEND"

try:
    from numba import njit  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only on numba-less installs
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        """No-op decorator standing in for numba.njit."""

        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


def default_backend() -> str:
    """Resolve the backend name ("numba" or "numpy") from the environment."""
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if choice == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise RuntimeError(f"{_ENV_VAR} must be 'auto', 'numba' or 'numpy', got {choice!r}")
