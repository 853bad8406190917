"""Sampled lower bound for the Lipschitz constant on a compact domain."""
from __future__ import annotations

from .. import kernels
from .domain import Box, Disk


def lipschitz_estimate(f, domain, grid: int = 201, backend=None) -> float:
    """max over sampled pairs of |f(x)-f(y)| / ||x-y|| on the domain.

    A lower bound on the true Lipschitz constant: it only looks at the grid.
    Monotone nondecreasing under nested grid refinements (m -> 2m-1).
    """
    if grid < 2:
        raise ValueError("grid must be at least 2 points per axis")
    if isinstance(domain, Disk):
        pts = domain.grid(grid)
    elif isinstance(domain, Box):
        pts = domain.grid(grid)
    else:
        raise TypeError("domain must be a Box or Disk")
    vals = kernels.evaluate_batch(f, pts, backend=backend)
    return kernels.max_pair_quotient(pts, vals, backend=backend)
