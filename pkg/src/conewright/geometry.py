"""Vector geometry shared by the cone and subdifferential estimators.

Slopes of graph secants are handled projectively: an unoriented line
direction in the graph plane is an angle theta in [0, pi), with theta =
atan(slope) mod pi and the vertical direction at theta = pi/2.  Interval
merging happens on the theta circle (0 and pi identify), then runs are
mapped back to closed slope intervals, splitting at the vertical direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonOrthonormalBasis, ZeroVector


def angle(x, y) -> float:
    """Cosine-valued angle <x,y>/(|x||y|), clamped to [-1, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("angle requires nonzero vectors")
    return float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))


def project(v, basis) -> np.ndarray:
    """Orthogonal projection of v onto span(basis); basis rows orthonormal."""
    v = np.asarray(v, dtype=float)
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    gram = b @ b.T
    if not np.allclose(gram, np.eye(b.shape[0]), atol=1e-10):
        raise NonOrthonormalBasis("projection basis is not orthonormal within 1e-10")
    return (b.T @ (b @ v)).astype(float)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return v / n


def angular_distance(u, vectors) -> np.ndarray:
    """arccos distance from unit vector u to each row of `vectors`."""
    dots = np.clip(np.asarray(vectors, dtype=float) @ np.asarray(u, dtype=float),
                   -1.0, 1.0)
    return np.arccos(dots)


def hausdorff_angular(a, b) -> float:
    """Symmetric Hausdorff distance (in radians) between unit-vector sets."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.size == 0 or b.size == 0:
        return math.pi
    dots = np.clip(a @ b.T, -1.0, 1.0)
    ang = np.arccos(dots)
    return float(max(ang.min(axis=1).max(), ang.min(axis=0).max()))


def theta_from_slope(s: float) -> float:
    return math.atan(s) % math.pi


def slope_from_theta(theta: float) -> float:
    return math.tan(theta)


@dataclass(frozen=True)
class ProjectiveSlope:
    """Unoriented graph-line direction as an angle in [0, pi)."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % math.pi)

    @classmethod
    def from_slope(cls, s: float) -> "ProjectiveSlope":
        return cls(theta_from_slope(s))

    @property
    def vertical(self) -> bool:
        return self.theta == math.pi / 2

    @property
    def slope(self) -> float:
        return math.tan(self.theta)


@dataclass(frozen=True)
class LinearFunctional:
    """L.x = sum_i alpha_i x_i."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(np.asarray(self.coeffs, float)))
        if not all(math.isfinite(v) for v in c):
            raise ValueError("linear functional coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(np.dot(self.array(), x))
        return x @ self.array()

    def graph_basis(self) -> np.ndarray:
        """Orthonormal rows spanning the graph subspace {(x, L.x)} of R^(n+1)."""
        n = self.dim
        a = self.array()
        raw = np.concatenate([np.eye(n), a[:, None]], axis=1)
        q, _ = np.linalg.qr(raw.T)
        return q.T[:n]

    def graph_perp_unit(self) -> np.ndarray:
        """Unit normal of the graph subspace, oriented with positive last entry."""
        a = self.array()
        v = np.concatenate([-a, [1.0]])
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SlopeSet:
    """Union of closed slope intervals plus an at-infinity (vertical) flag."""

    intervals: tuple  # tuple of (lo, hi), disjoint, sorted
    infinity: bool

    def contains(self, s: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= s <= hi + tol for lo, hi in self.intervals)

    def distance(self, s: float) -> float:
        """Distance from s to the union (0 if covered; inf if empty)."""
        if not self.intervals:
            return math.inf
        best = math.inf
        for lo, hi in self.intervals:
            if lo <= s <= hi:
                return 0.0
            best = min(best, abs(s - lo), abs(s - hi))
        return best

    def width(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def span(self):
        if not self.intervals:
            return None
        return (self.intervals[0][0], self.intervals[-1][1])

    def to_json(self):
        return {
            "intervals": [[lo, hi] for lo, hi in self.intervals],
            "infinity": self.infinity,
        }


def _merge_touching(intervals):
    if not intervals:
        return ()
    intervals = sorted(intervals)
    out = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def slope_union(samples, gap_tol: float, vertical_tol: float | None = None) -> SlopeSet:
    """Condense projective slope samples into maximal closed intervals.

    Samples whose theta gaps are <= gap_tol are bridged into one run; runs
    are split at the vertical direction when mapping back to slopes.  The
    infinity flag is set iff some sample's theta lies within vertical_tol
    (default gap_tol) of pi/2.
    """
    if vertical_tol is None:
        vertical_tol = gap_tol
    thetas = []
    slopes = []
    for s in samples:
        if isinstance(s, ProjectiveSlope):
            thetas.append(s.theta)
            slopes.append(math.tan(s.theta))
        else:
            slopes.append(float(s))
            thetas.append(theta_from_slope(float(s)))
    if not thetas:
        raise ValueError("slope_union requires a nonempty sample list")
    thetas = np.asarray(thetas)
    slopes = np.asarray(slopes)
    infinity = bool(np.any(np.abs(thetas - math.pi / 2) <= vertical_tol))

    order = np.argsort(thetas, kind="stable")
    thetas = thetas[order]
    slopes = slopes[order]
    m = thetas.size
    if m == 1:
        return SlopeSet(((slopes[0], slopes[0]),), infinity)

    gaps = np.empty(m)
    gaps[:-1] = np.diff(thetas)
    gaps[-1] = thetas[0] + math.pi - thetas[-1]  # wrap gap
    if np.all(gaps <= gap_tol):
        # the samples cover the whole projective circle
        cap = float(np.max(np.abs(slopes)))
        return SlopeSet(((-cap, cap),), True)

    start = int(np.argmax(gaps)) + 1  # walk begins after the largest gap
    idx = np.arange(start, start + m) % m
    walk_thetas = thetas[idx]
    walk_slopes = slopes[idx]
    walk_gaps = gaps[(idx - 1) % m]  # gap preceding each walked sample

    intervals = []
    run = [0]
    for j in range(1, m):
        if walk_gaps[j] <= gap_tol:
            run.append(j)
        else:
            intervals.extend(_run_to_intervals(walk_thetas, walk_slopes, run))
            run = [j]
    intervals.extend(_run_to_intervals(walk_thetas, walk_slopes, run))
    return SlopeSet(_merge_touching(intervals), infinity)


def _run_to_intervals(thetas, slopes, run):
    """Split one circular run at the vertical direction, yield slope intervals."""
    half = math.pi / 2
    base = thetas[run[0]]
    # unroll the walk so theta increases monotonically from the run start
    unrolled = [(thetas[j] - base) % math.pi for j in run]
    crossing = (half - base) % math.pi
    below = [slopes[run[k]] for k, t in enumerate(unrolled) if t <= crossing]
    above = [slopes[run[k]] for k, t in enumerate(unrolled) if t > crossing]
    out = []
    for chunk in (below, above):
        if chunk:
            out.append((min(chunk), max(chunk)))
    return out
