"""Numba detection and the njit shim used by the hot kernels.

The environment variable ``LATTICE_RECON_NUMBA`` selects the backend:
unset / ``1`` / ``auto`` uses numba when importable, ``0`` (or ``false``,
``no``, ``off``) forces the pure-numpy fallback kernels.
"""

import os

__all__ = ["HAVE_NUMBA", "BACKEND", "njit"]


def _numba_wanted() -> bool:
    value = os.environ.get("LATTICE_RECON_NUMBA", "auto").strip().lower()
    return value not in ("0", "false", "no", "off")


HAVE_NUMBA = False
if _numba_wanted():
    try:
        from numba import njit  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        pass

if not HAVE_NUMBA:

    def njit(*args, **kwargs):
        """No-op decorator; the jitted twins are unused on the numpy path."""
        if args and callable(args[0]):
            return args[0]
        return lambda func: func


BACKEND = "numba" if HAVE_NUMBA else "numpy"
