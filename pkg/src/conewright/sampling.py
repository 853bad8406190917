"""Deterministic low-discrepancy point streams.

Additive-recurrence (Kronecker) sequences with generalized golden-ratio
increments: u_k = frac(offset + k * alpha).  The offset is a hash of
(seed, stream tag, coordinate), so distinct seeds and tags give distinct,
reproducible subsequences with no RNG library in the loop.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _alphas(dim: int) -> np.ndarray:
    # phi_d: unique positive root of x^(d+1) = x + 1
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dim + 1))
    return np.array([(1.0 / phi) ** (i + 1) % 1.0 for i in range(dim)])


def _hash01(*ints) -> float:
    h = np.uint64(0x9E3779B97F4A7C15)
    for v in ints:
        h = np.uint64(h ^ np.uint64(v & 0xFFFFFFFFFFFFFFFF))
        h = np.uint64(h * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
        h = np.uint64(h ^ (h >> np.uint64(31)))
    return float(h) / float(2**64)


def stream(dim: int, count: int, seed: int, tag: int) -> np.ndarray:
    """(count, dim) low-discrepancy points in [0, 1)."""
    alpha = _alphas(dim)
    offsets = np.array([_hash01(seed, tag, i) for i in range(dim)])
    k = np.arange(count, dtype=float)[:, None]
    return (offsets + k * alpha) % 1.0


def cube_to_ball(u: np.ndarray) -> np.ndarray:
    """Map [0,1)^d points onto the unit ball (surjective, norm-preserving rays)."""
    p = 2.0 * u - 1.0
    linf = np.max(np.abs(p), axis=1)
    l2 = np.linalg.norm(p, axis=1)
    scale = np.divide(linf, l2, out=np.zeros_like(l2), where=l2 > 0)
    return p * scale[:, None]


def ball_points(center, radius: float, count: int, seed: int, tag: int) -> np.ndarray:
    center = np.atleast_1d(np.asarray(center, dtype=float))
    u = stream(center.size, count, seed, tag)
    return center + radius * cube_to_ball(u)


def sphere_directions(u: np.ndarray) -> np.ndarray:
    """Unit directions from [0,1)^d stream points (d >= 1)."""
    if u.shape[1] == 1:
        return np.where(u >= 0.5, 1.0, -1.0)
    p = 2.0 * u - 1.0
    n = np.linalg.norm(p, axis=1)
    bad = n < 1e-9
    p[bad] = 0.0
    p[bad, 0] = 1.0
    n[bad] = 1.0
    return p / n[:, None]


def log_scales(u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Log-uniform values in [lo, hi] from stream coordinates in [0,1)."""
    return hi * (lo / hi) ** u


def direction_grid(dim: int, count: int) -> np.ndarray:
    """Deterministic unit-sphere grid used for support functions."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    return sphere_directions(stream(dim, count, 0, 0x5D))
