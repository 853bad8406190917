"""Pairwise difference-quotient scan used by the Lipschitz estimator.

The numba kernel streams over all point pairs without materializing the
O(m^2) distance matrix; the numpy fallback processes row blocks to bound
memory.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def _max_quotient_numba(pts, vals):  # pragma: no cover - jitted
        m, n = pts.shape
        best = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                d2 = 0.0
                for k in range(n):
                    diff = pts[i, k] - pts[j, k]
                    d2 += diff * diff
                if d2 > 0.0:
                    q = abs(vals[i] - vals[j]) / np.sqrt(d2)
                    if q > best:
                        best = q
        return best


def _max_quotient_numpy(pts, vals, block=512):
    m = pts.shape[0]
    best = 0.0
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        diff = pts[i0:i1, None, :] - pts[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        dv = np.abs(vals[i0:i1, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dist > 0.0, dv / dist, 0.0)
        block_best = q.max() if q.size else 0.0
        if block_best > best:
            best = float(block_best)
    return best


def max_pair_quotient(pts: np.ndarray, vals: np.ndarray, backend: str) -> float:
    """max over point pairs of |f(x)-f(y)| / ||x-y|| (coincident pairs skipped)."""
    pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    if backend == "numba" and HAVE_NUMBA:
        return float(_max_quotient_numba(pts, vals))
    return _max_quotient_numpy(pts, vals)
