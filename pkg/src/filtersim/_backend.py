"""Backend selection for the hot simulation kernels.

``FILTERSIM_BACKEND=numpy`` forces the pure-numpy path; otherwise numba is
used when importable.  The choice is made once, at import.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_requested = os.environ.get("FILTERSIM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"FILTERSIM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and numba is not None) else "numpy"


def njit(fn):
    return numba.njit(nogil=True)(fn)
