"""Multi-scale estimators for tangent cones, normal-cone membership, and
distance-realization checks.

All estimators share one discretization: a geometric ladder of radii
r_k = r0 * rho^k (k = 1..levels) with a fixed sample budget per level,
fed by the seeded low-discrepancy stream.  A direction belongs to the
estimate when it is witnessed at the finest level and re-witnessed (within
the angular tolerance) at each of the two preceding levels — the finite
surrogate for "holds along some sequence of shrinking scales".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels, sampling
from .errors import EmptyCone, UnstableEstimate
from .expr.ast import arity
from .geometry import angle, hausdorff_angular

_PAIR_TAG = 0x10
_PAIR_LOG_TAG = 0x20
_POINT_TAG = 0x30


@dataclass(frozen=True)
class ScaleSchedule:
    """Geometric ladder of sampling radii with a per-level sample budget."""

    r0: float = 0.1
    rho: float = 0.5
    levels: int = 14
    samples_per_level: int = 512
    seed: int = 0

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.levels < 3:
            raise ValueError("need at least 3 levels")
        if self.samples_per_level < 16:
            raise ValueError("need at least 16 samples per level")

    def radii(self) -> np.ndarray:
        k = np.arange(1, self.levels + 1)
        return self.r0 * self.rho ** k

    @property
    def finest_radius(self) -> float:
        return self.r0 * self.rho ** self.levels

    @property
    def theta_tol(self) -> float:
        """Angular direction resolution pi / (2 sqrt(M))."""
        return math.pi / (2.0 * math.sqrt(self.samples_per_level))

    def scaled(self, levels=None, samples=None) -> "ScaleSchedule":
        return replace(
            self,
            levels=levels if levels is not None else self.levels,
            samples_per_level=samples if samples is not None else self.samples_per_level,
        )

    def to_json(self):
        return {
            "r0": self.r0,
            "rho": self.rho,
            "levels": self.levels,
            "samples_per_level": self.samples_per_level,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class DirectionSet:
    """Finite set of witnessed unit directions in graph space.

    `symmetric` marks full (line-through-origin) cones; symmetric sets store
    both orientations explicitly, so they are closed under negation.
    """

    vectors: np.ndarray          # (m, d) unit rows
    persistence: np.ndarray      # consecutive levels witnessed, counted from finest
    finest_scale: np.ndarray     # radius of the finest witnessing level
    symmetric: bool

    def __len__(self):
        return self.vectors.shape[0]

    def min_angle_to(self, v) -> float:
        if len(self) == 0:
            return math.pi
        dots = np.clip(self.vectors @ (v / np.linalg.norm(v)), -1.0, 1.0)
        return float(np.arccos(dots).min())

    def contains(self, v, tol: float):
        res = self.min_angle_to(v)
        return res <= tol, res

    def to_json(self):
        return {
            "vectors": self.vectors.tolist(),
            "persistence": self.persistence.tolist(),
            "finest_scale": self.finest_scale.tolist(),
            "symmetric": self.symmetric,
        }


@dataclass(frozen=True)
class ConeEstimate:
    directions: DirectionSet
    stabilized: bool
    finest_radius: float
    levels: tuple  # per-level diagnostics dicts

    def to_json(self):
        return {
            "directions": self.directions.vectors.tolist(),
            "stabilized": self.stabilized,
            "finest_radius": self.finest_radius,
            "persistence": self.directions.persistence.tolist(),
            "symmetric": self.directions.symmetric,
        }


def _clip(domain, pts):
    return pts if domain is None else domain.clip(pts)


def _graph_dirs(deltas, dvals):
    g = np.concatenate([deltas, dvals[:, None]], axis=1)
    norms = np.linalg.norm(g, axis=1)
    ok = norms > 0
    return g[ok] / norms[ok, None]


def pair_floor(r: float) -> float:
    """Smallest admissible pair separation at sampling radius r."""
    return max(1e-9 * r, 1e-13)


def _sample_pairs(dim, a, r, m, seed, level):
    """Level pair sample: half independent ball points, half log-spaced
    separations down to the degeneracy floor (so secants exist at every
    separation scale the limit definition quantifies over)."""
    m_ind = m // 2
    m_log = m - m_ind
    u = sampling.stream(2 * dim, m_ind, seed, _PAIR_TAG + level)
    p1 = a + r * sampling.cube_to_ball(u[:, :dim])
    q1 = a + r * sampling.cube_to_ball(u[:, dim:])
    v = sampling.stream(2 * dim + 1, m_log, seed, _PAIR_LOG_TAG + level)
    p2 = a + r * sampling.cube_to_ball(v[:, :dim])
    sep = sampling.log_scales(v[:, dim], pair_floor(r), 2.0 * r)
    dirs = sampling.sphere_directions(v[:, dim + 1:] if dim > 1 else v[:, dim + 1:dim + 2])
    q2 = p2 - sep[:, None] * dirs
    # keep the second endpoint inside the sampling ball
    excess = np.linalg.norm(q2 - a, axis=1)
    outside = excess > r
    if np.any(outside):
        q2_in = p2 + sep[:, None] * dirs
        q2[outside] = q2_in[outside]
        excess = np.linalg.norm(q2 - a, axis=1)
        outside = excess > r
        q2[outside] = a + (q2[outside] - a) * (r / excess[outside])[:, None]
    return np.concatenate([p1, p2]), np.concatenate([q1, q2])


def _pair_level(f, domain, a, r, m, seed, level):
    """Evaluate one level of pair sampling; returns (P, Q, fP, fQ, stats)."""
    dim = a.size
    P, Q = _sample_pairs(dim, a, r, m, seed, level)
    P = _clip(domain, P)
    Q = _clip(domain, Q)
    sep = np.linalg.norm(P - Q, axis=1)
    keep = sep >= pair_floor(r)
    stats = {
        "radius": r,
        "pairs": int(m),
        "degenerate": int(m - keep.sum()),
        "unreliable": bool(keep.sum() < 0.1 * m),
    }
    P, Q = P[keep], Q[keep]
    if P.shape[0]:
        vals = kernels.evaluate_batch(f, np.concatenate([P, Q], axis=0))
        fP, fQ = vals[: P.shape[0]], vals[P.shape[0]:]
    else:
        fP = fQ = np.empty(0)
    return P, Q, fP, fQ, stats


def _dedup_directions(dirs, theta_tol):
    """Greedy first-seen dedup at angular resolution theta_tol (stream order)."""
    reps = []
    for v in dirs:
        if not reps:
            reps.append(v)
            continue
        dots = np.clip(np.asarray(reps) @ v, -1.0, 1.0)
        if np.arccos(dots).min() > theta_tol:
            reps.append(v)
    return np.asarray(reps) if reps else np.empty((0, dirs.shape[1]))


def _present(rep, level_dirs, theta_tol):
    if level_dirs.shape[0] == 0:
        return False
    dots = np.clip(level_dirs @ rep, -1.0, 1.0)
    return bool(np.arccos(dots).min() <= theta_tol)


def _persistent_set(level_dirs, radii, theta_tol, symmetric):
    """Representatives from the finest level re-witnessed at the two levels
    before it, with consecutive-from-finest persistence counts."""
    finest = level_dirs[-1]
    if finest.shape[0] == 0:
        raise EmptyCone("no secant directions at the finest level")
    reps = _dedup_directions(finest, theta_tol)
    keep = []
    counts = []
    for rep in reps:
        count = 0
        for k in range(len(level_dirs) - 1, -1, -1):
            if _present(rep, level_dirs[k], theta_tol):
                count += 1
            else:
                break
        if count >= min(3, len(level_dirs)):
            keep.append(rep)
            counts.append(count)
    if not keep:
        raise EmptyCone("no direction persisted across the finest levels")
    vectors = np.asarray(keep)
    counts = np.asarray(counts, dtype=int)
    return DirectionSet(
        vectors=vectors,
        persistence=counts,
        finest_scale=np.full(len(counts), radii[-1]),
        symmetric=symmetric,
    )


def _stabilized(level_dirs, theta_tol) -> bool:
    last = level_dirs[-3:]
    if any(d.shape[0] == 0 for d in last):
        return False
    worst = 0.0
    for i in range(len(last)):
        for j in range(i + 1, len(last)):
            worst = max(worst, hausdorff_angular(last[i], last[j]))
    return worst <= 2.0 * theta_tol


def estimate_btc_cone(f, a, sched: ScaleSchedule, domain=None) -> ConeEstimate:
    """Bisequential tangent cone of the graph of f at (a, f(a)).

    Collects unit secant directions (p - q, f(p) - f(q))/|..| over pairs with
    both ends within each level radius of a, symmetrizes (the cone contains
    the full line through every direction), and keeps persistent directions.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    radii = sched.radii()
    level_dirs = []
    stats = []
    for lvl, r in enumerate(radii):
        P, Q, fP, fQ, st = _pair_level(
            f, domain, a, r, sched.samples_per_level, sched.seed, lvl
        )
        dirs = _graph_dirs(P - Q, fP - fQ)
        dirs = np.concatenate([dirs, -dirs], axis=0) if dirs.size else dirs
        level_dirs.append(dirs)
        stats.append(st)
    dset = _persistent_set(level_dirs, radii, sched.theta_tol, symmetric=True)
    return ConeEstimate(
        directions=dset,
        stabilized=_stabilized(level_dirs, sched.theta_tol)
        and not any(s["unreliable"] for s in stats[-3:]),
        finest_radius=float(radii[-1]),
        levels=tuple(stats),
    )


def estimate_peano_cone(f, a, sched: ScaleSchedule, domain=None) -> ConeEstimate:
    """One-ended tangent cone: directions of secants from (a, f(a)) to nearby
    graph points.  Oriented — not symmetrized."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    fa = kernels.evaluate(f, a)
    radii = sched.radii()
    level_dirs = []
    stats = []
    for lvl, r in enumerate(radii):
        pts = _clip(domain, sampling.ball_points(a, r, sched.samples_per_level,
                                                 sched.seed, _POINT_TAG + lvl))
        d = pts - a
        keep = np.linalg.norm(d, axis=1) > 0
        pts = pts[keep]
        stats.append({
            "radius": r,
            "samples": int(sched.samples_per_level),
            "degenerate": int(sched.samples_per_level - keep.sum()),
            "unreliable": bool(keep.sum() < 0.1 * sched.samples_per_level),
        })
        if pts.shape[0]:
            vals = kernels.evaluate_batch(f, pts)
            level_dirs.append(_graph_dirs(pts - a, vals - fa))
        else:
            level_dirs.append(np.empty((0, a.size + 1)))
    dset = _persistent_set(level_dirs, radii, sched.theta_tol, symmetric=False)
    return ConeEstimate(
        directions=dset,
        stabilized=_stabilized(level_dirs, sched.theta_tol),
        finest_radius=float(radii[-1]),
        levels=tuple(stats),
    )


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    residuals: np.ndarray  # per grid direction, worst angular distance
    note: str = ""

    def to_json(self):
        out = {"member": self.member, "residuals": self.residuals.tolist()}
        if self.note:
            out["note"] = self.note
        return out


def btc_hyperplane_membership(f, a, L, dirs, sched: ScaleSchedule, tol: float,
                              domain=None) -> MembershipResult:
    """Does the graph hyperplane of the linear functional L lie inside the
    estimated bisequential cone at a?

    Checks every direction x of the grid: the graph direction of (x, L.x)
    must be within angular tol of some estimated cone direction.  A finite
    grid only ever checks finitely many of the required directions; the
    result carries a note saying so for n > 1.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if dirs.shape[0] == 0:
        raise ValueError("direction grid must be nonempty")
    est = estimate_btc_cone(f, a, sched, domain=domain)
    if not est.stabilized:
        raise UnstableEstimate("bisequential cone estimate did not stabilize")
    res = np.empty(dirs.shape[0])
    for j, x in enumerate(dirs):
        target = np.concatenate([x, [float(L(x))]])
        target = target / np.linalg.norm(target)
        res[j] = est.directions.min_angle_to(target)
    note = ""
    if a.size > 1:
        note = ("membership was verified on a finite direction grid of "
                f"{dirs.shape[0]} points, not on every direction")
    return MembershipResult(member=bool(np.all(res <= tol)), residuals=res,
                            note=note)


def normal_cone_member(v, tangent: ConeEstimate, tol: float):
    """Is v in the polar of the estimated tangent cone?

    True iff angle(v, w) <= tol for every estimated tangent direction w;
    the zero vector is a member by convention.  Returns (member, worst),
    where worst is the largest cosine-valued angle encountered.
    """
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0.0:
        return True, 0.0
    if len(tangent.directions) == 0:
        raise EmptyCone("tangent estimate holds no directions")
    worst = max(angle(v, w) for w in tangent.directions.vectors)
    return worst <= tol, worst


@dataclass(frozen=True)
class DistanceCheck:
    realized: bool
    argmin: np.ndarray
    min_distance: float
    candidate_distance: float

    def to_json(self):
        return {
            "realized": self.realized,
            "argmin": self.argmin.tolist(),
            "min_distance": self.min_distance,
            "candidate_distance": self.candidate_distance,
        }


def distance_realization_check(f, domain, x, a, grid: int = 241) -> DistanceCheck:
    """Is the Euclidean distance from graph-space point x to the graph of f
    (over the domain grid) realized at the foot point a?"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    pts = domain.grid(grid)
    vals = kernels.evaluate_batch(f, pts)
    graph = np.concatenate([pts, vals[:, None]], axis=1)
    dists = np.linalg.norm(graph - x, axis=1)
    jmin = int(np.argmin(dists))
    fa = kernels.evaluate(f, a)
    da = float(np.linalg.norm(np.concatenate([a, [fa]]) - x))
    return DistanceCheck(
        realized=bool(da <= dists[jmin] + 1e-9),
        argmin=pts[jmin],
        min_distance=float(dists[jmin]),
        candidate_distance=da,
    )
