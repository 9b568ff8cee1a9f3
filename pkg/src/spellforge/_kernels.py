"""Edit-distance kernels.

Two interchangeable backends fill the optimal-string-alignment (OSA) matrix and
walk it back into an operation trace:

* ``numba``: the plain loop bodies below compiled with ``@njit``.
* ``numpy``: a row-vectorised fill (insertions resolved with a running
  minimum) plus the same traceback loop run by the interpreter.

The backend is picked once at import. Set ``SPELLFORGE_DISABLE_NUMBA=1`` (or
uninstall numba) to force the numpy path. Both backends are always importable
under their explicit names so they can be compared directly.

Sequences are passed as 1-D ``int32`` arrays of code points (or token ids).
Operation codes double as the traceback tie-break priority: lower wins.
"""

from __future__ import annotations

import os

import numpy as np

MATCH = 0
SUBSTITUTION = 1
TRANSPOSITION = 2
DELETION = 3
INSERTION = 4

_FALSY = {"", "0", "false", "no", "off"}
DISABLED_BY_ENV = os.environ.get("SPELLFORGE_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None


def encode(text: str) -> np.ndarray:
    """Code points of ``text`` as an int32 array."""
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def _fill_loops(a, b, transpose):
    n = a.shape[0]
    m = b.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int32)
    for i in range(n + 1):
        d[i, 0] = i
    for j in range(m + 1):
        d[0, j] = j
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = d[i - 1, j - 1] + (0 if ai == b[j - 1] else 1)
            cand = d[i - 1, j] + 1
            if cand < best:
                best = cand
            cand = d[i, j - 1] + 1
            if cand < best:
                best = cand
            if transpose and i > 1 and j > 1 and ai == b[j - 2] and a[i - 2] == b[j - 1]:
                cand = d[i - 2, j - 2] + 1
                if cand < best:
                    best = cand
            d[i, j] = best
    return d


def fill_matrix_numpy(a: np.ndarray, b: np.ndarray, transpose: bool) -> np.ndarray:
    n = a.shape[0]
    m = b.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int32)
    offsets = np.arange(m + 1, dtype=np.int32)
    d[0] = offsets
    for i in range(1, n + 1):
        prev = d[i - 1]
        row = np.empty(m + 1, dtype=np.int32)
        row[0] = i
        if m:
            row[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i - 1]))
            if transpose and i > 1 and m > 1:
                swap = (b[:-1] == a[i - 1]) & (b[1:] == a[i - 2])
                row[2:] = np.where(swap, np.minimum(row[2:], d[i - 2, :-2] + 1), row[2:])
            # row[j] = min(row[j], row[j-1] + 1) unrolled as a running minimum
            row = np.minimum.accumulate(row - offsets) + offsets
        d[i] = row
    return d


def _trace_loops(d, a, b, transpose):
    i = a.shape[0]
    j = b.shape[0]
    out = np.empty((i + j, 3), dtype=np.int32)
    k = 0
    while i > 0 or j > 0:
        cur = d[i, j]
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and d[i - 1, j - 1] == cur:
            code, di, dj = MATCH, 1, 1
        elif i > 0 and j > 0 and a[i - 1] != b[j - 1] and d[i - 1, j - 1] + 1 == cur:
            code, di, dj = SUBSTITUTION, 1, 1
        elif (
            transpose
            and i > 1
            and j > 1
            and a[i - 1] == b[j - 2]
            and a[i - 2] == b[j - 1]
            and a[i - 1] != a[i - 2]
            and d[i - 2, j - 2] + 1 == cur
        ):
            code, di, dj = TRANSPOSITION, 2, 2
        elif i > 0 and d[i - 1, j] + 1 == cur:
            code, di, dj = DELETION, 1, 0
        else:
            code, di, dj = INSERTION, 0, 1
        i -= di
        j -= dj
        out[k, 0] = code
        out[k, 1] = i
        out[k, 2] = j
        k += 1
    return out[:k][::-1].copy()


def trace_numpy(d: np.ndarray, a: np.ndarray, b: np.ndarray, transpose: bool) -> np.ndarray:
    return _trace_loops(d, a, b, transpose)


if numba is not None:
    fill_matrix_jit = numba.njit(cache=True, nogil=True)(_fill_loops)
    trace_jit = numba.njit(cache=True, nogil=True)(_trace_loops)
else:  # pragma: no cover
    fill_matrix_jit = None
    trace_jit = None

JIT_ENABLED = fill_matrix_jit is not None and not DISABLED_BY_ENV
BACKEND = "numba" if JIT_ENABLED else "numpy"

if JIT_ENABLED:
    fill_matrix = fill_matrix_jit
    trace = trace_jit
else:
    fill_matrix = fill_matrix_numpy
    trace = trace_numpy
