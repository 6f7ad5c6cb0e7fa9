"""Backend selection for the batched evaluation kernels.

The hot kernels in :mod:`longresolvent._kernels` exist in two flavours: a
numba ``@njit`` loop and a pure-numpy (stacked gufunc) twin.  The active
flavour is chosen once, at import time, from the ``LONGRES_BACKEND``
environment variable:

    LONGRES_BACKEND=numpy   force the pure-numpy path
    LONGRES_BACKEND=numba   force numba (ImportError if numba is missing)
    unset                   numba when importable, numpy otherwise

``benchmarks/bench_eval.py`` times both paths against each other.
"""

import os

_FLAG = os.environ.get("LONGRES_BACKEND", "").strip().lower()
if _FLAG not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"LONGRES_BACKEND must be 'numba' or 'numpy', got {_FLAG!r}"
    )

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

if _FLAG == "numba" and not HAVE_NUMBA:
    raise RuntimeError("LONGRES_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA if _FLAG == "" else (_FLAG == "numba")
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit_or_plain(fn):
    """Compile ``fn`` with numba when the numba backend is active."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn
