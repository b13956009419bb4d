"""Kernel backend selection.

Hot per-cell kernels exist in two variants: numba ``@njit`` loops and a
vectorized pure-numpy path.  The environment variable ``SLIPFSI_BACKEND``
selects between them:

    auto   -- numba when importable, numpy otherwise (default)
    numba  -- require numba, fail loudly if unavailable
    numpy  -- force the pure-numpy fallback

Both paths produce results that agree to floating-point reordering
(~1e-13 relative); within one backend every run is deterministic because
no parallel reductions are used.
"""

import os

_choice = os.environ.get("SLIPFSI_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"SLIPFSI_BACKEND must be auto|numba|numpy, got {_choice!r}")

_numba_ok = False
if _choice in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        _numba_ok = True
    except ImportError:
        if _choice == "numba":
            raise

USE_NUMBA = _numba_ok


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def njit_if_enabled(fn):
    """Compile ``fn`` with numba when the numba backend is active."""
    if USE_NUMBA:
        from numba import njit

        return njit(cache=True)(fn)
    return fn


def njit_always(fn):
    """Compile ``fn`` unconditionally (used by the benchmark to time both paths)."""
    from numba import njit

    return njit(cache=True)(fn)
