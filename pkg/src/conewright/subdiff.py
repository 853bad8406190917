"""Subdifferential estimators: two-ended secant slopes (1-D), the
generalized directional derivative and gradient, Fréchet/limiting
membership, and the cross-comparison between the secant-based and the
directional-derivative-based sets.

limsup/liminf discretization: per-level extremum, then an envelope over the
last three levels biased in the operator's direction (max for limsup, min
for liminf) — conservative for membership claims.  An estimate is declared
stabilized when consecutive per-level extrema drift by at most tol/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, sampling
from .cones import ScaleSchedule, _pair_level, estimate_btc_cone, pair_floor
from .errors import NotLipschitz, UnstableEstimate
from .expr.ast import arity
from .expr.domain import Box
from .expr.lipschitz import lipschitz_estimate
from .geometry import SlopeSet, slope_union, theta_from_slope

SLOPE_TOL = 0.05          # default endpoint/membership tolerance
DRIFT_TOL = SLOPE_TOL / 2  # stabilization: consecutive-level drift bound

_CLARKE_TAG = 0x40
_FRECHET_TAG = 0x60
_LIMITING_TAG = 0x80


def _circ_theta_dist(a, b):
    d = np.abs(a - b) % math.pi
    return np.minimum(d, math.pi - d)


# ---------------------------------------------------------------------------
# Lipschitz sanity gate


def _gate_points(domain, a, r, per_axis):
    box = Box(tuple(a - r), tuple(a + r))
    pts = box.grid(per_axis)
    if domain is not None:
        pts = pts[domain.contains(pts)]
    return pts


def lipschitz_gate(f, a, domain=None, r0: float = 0.1, rel: float = 0.25):
    """Sampled Lipschitz constants on radius-r0 and radius-r0/4 boxes around
    a must agree within 25%, else the Clarke-side machinery refuses."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    per_axis = 201 if a.size == 1 else (33 if a.size == 2 else 9)
    ms = []
    for r in (r0, r0 / 4.0):
        pts = _gate_points(domain, a, r, per_axis)
        if pts.shape[0] < 2:
            raise NotLipschitz("not enough domain points near a to gate")
        vals = kernels.evaluate_batch(f, pts)
        ms.append(kernels.max_pair_quotient(pts, vals))
    coarse, fine = ms
    top = max(coarse, fine)
    if top <= 1e-12:
        return coarse, fine
    if abs(coarse - fine) >= rel * top:
        raise NotLipschitz(
            f"Lipschitz estimates do not stabilize across refinement "
            f"({coarse:.4g} vs {fine:.4g})",
            coarse=coarse,
            fine=fine,
        )
    return coarse, fine


# ---------------------------------------------------------------------------
# 1-D secant-slope subdifferential


@dataclass(frozen=True)
class SubdiffEstimate1D:
    slopes: SlopeSet
    stabilized: bool
    finest_radius: float
    max_abs_slope: float
    level_stats: tuple  # dicts: radius, pairs, degenerate, min/max slope

    def to_json(self):
        out = self.slopes.to_json()
        out["stabilized"] = self.stabilized
        return out

    def interval_span(self):
        return self.slopes.span()


def btc_subdifferential_1d(f, a, sched: ScaleSchedule, domain=None) -> SubdiffEstimate1D:
    """Persistent two-ended secant slopes at a, merged into closed intervals.

    A finest-level slope sample enters the estimate iff a sample within the
    angular tolerance exists at each of the two preceding levels as well.
    The at-infinity flag follows the projective threshold |s| > 1/theta_tol.
    """
    if arity(f) > 1:
        raise ValueError("btc_subdifferential_1d needs a one-variable function")
    a_arr = np.atleast_1d(np.asarray(a, dtype=float))
    radii = sched.radii()
    theta_tol = sched.theta_tol
    level_thetas = []
    level_slopes = []
    stats = []
    for lvl, r in enumerate(radii):
        P, Q, fP, fQ, st = _pair_level(
            f, domain, a_arr, r, sched.samples_per_level, sched.seed, lvl
        )
        sep = (P - Q)[:, 0]
        slopes = (fP - fQ) / sep
        thetas = np.arctan(slopes) % math.pi
        st["min_slope"] = float(slopes.min()) if slopes.size else math.nan
        st["max_slope"] = float(slopes.max()) if slopes.size else math.nan
        level_thetas.append(thetas)
        level_slopes.append(slopes)
        stats.append(st)

    finest_thetas = level_thetas[-1]
    finest_slopes = level_slopes[-1]
    if finest_thetas.size == 0:
        raise UnstableEstimate("no admissible secant pairs at the finest level")
    persistent = np.ones(finest_thetas.size, dtype=bool)
    for back in (2, 3):
        prev = level_thetas[-back]
        if prev.size == 0:
            persistent[:] = False
            break
        d = _circ_theta_dist(finest_thetas[:, None], prev[None, :])
        persistent &= d.min(axis=1) <= theta_tol

    kept = finest_slopes[persistent]
    if kept.size == 0:
        raise UnstableEstimate("no finest-level slope persisted across levels")
    slope_set = slope_union(
        kept, gap_tol=2.0 * theta_tol, vertical_tol=math.atan(theta_tol)
    )

    # endpoint stabilization: per-level extreme slopes must stop drifting
    drift_ok = True
    for back in (1, 2):
        cur, prev = stats[-back], stats[-back - 1]
        for key in ("min_slope", "max_slope"):
            d = _circ_theta_dist(
                np.array(theta_from_slope(cur[key])),
                np.array(theta_from_slope(prev[key])),
            )
            if float(d) > DRIFT_TOL:
                drift_ok = False
    stab = drift_ok and not any(s["unreliable"] for s in stats[-3:])
    return SubdiffEstimate1D(
        slopes=slope_set,
        stabilized=stab,
        finest_radius=float(radii[-1]),
        max_abs_slope=float(np.abs(finest_slopes).max()),
        level_stats=tuple(stats),
    )


# ---------------------------------------------------------------------------
# generalized directional derivative / gradient


@dataclass(frozen=True)
class DirectionalDerivative:
    value: float
    stabilized: bool
    per_level: tuple

    def to_json(self):
        return {"value": self.value, "stabilized": self.stabilized}


def clarke_directional(f, a, v, sched: ScaleSchedule, domain=None,
                       gate: bool = True) -> DirectionalDerivative:
    """limsup over x -> a, t -> 0+ of (f(x + t v) - f(x)) / t.

    Per level: max of the quotient over ball points x and log-spaced steps
    t in (floor, r_k]; the returned value is the max of the last three
    per-level maxima (over-estimating bias, as a limsup should)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if gate:
        lipschitz_gate(f, a, domain=domain, r0=sched.r0)
    radii = sched.radii()
    m = sched.samples_per_level
    dim = a.size
    per_level = []
    for lvl, r in enumerate(radii):
        u = sampling.stream(dim + 1, m, sched.seed, _CLARKE_TAG + lvl)
        x = a + r * sampling.cube_to_ball(u[:, :dim])
        t = sampling.log_scales(u[:, dim], pair_floor(r), r)
        y = x + t[:, None] * v
        if domain is not None:
            ok = domain.contains(x) & domain.contains(y)
            x, y, t = x[ok], y[ok], t[ok]
        if x.shape[0] == 0:
            per_level.append(-math.inf)
            continue
        vals = kernels.evaluate_batch(f, np.concatenate([x, y], axis=0))
        q = (vals[x.shape[0]:] - vals[: x.shape[0]]) / t
        per_level.append(float(q.max()))
    tail = [p for p in per_level[-3:] if math.isfinite(p)]
    if not tail:
        raise UnstableEstimate("no admissible (x, t) samples near a")
    value = max(tail)
    drift = max(
        abs(per_level[-1] - per_level[-2]), abs(per_level[-2] - per_level[-3])
    ) if all(math.isfinite(p) for p in per_level[-3:]) else math.inf
    return DirectionalDerivative(
        value=value, stabilized=bool(drift <= DRIFT_TOL), per_level=tuple(per_level)
    )


@dataclass(frozen=True)
class ConvexSetApprox:
    """Support-function samples h_j ~ f°(a; v_j) over a direction grid.

    xi belongs to the induced convex set iff <xi, v_j> <= h_j + tol for all j.
    """

    directions: np.ndarray
    support: np.ndarray
    tol: float

    def member(self, xi, tol: float | None = None) -> bool:
        t = self.tol if tol is None else tol
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return bool(np.all(self.directions @ xi <= self.support + t))

    def interval(self):
        """1-D reduction [-h(-1), h(+1)] (requires the 1-D grid)."""
        if self.directions.shape[1] != 1:
            raise ValueError("interval() is only defined for 1-D sets")
        plus = float(self.support[self.directions[:, 0] > 0][0])
        minus = float(self.support[self.directions[:, 0] < 0][0])
        return (-minus, plus)

    def consistency_gap(self) -> float:
        """max over antipodal grid pairs of (-h_-j - h_j); <= 0 for a
        nonempty induced set."""
        gap = -math.inf
        for j, v in enumerate(self.directions):
            dots = self.directions @ v
            k = int(np.argmin(dots))
            if dots[k] < -1.0 + 1e-9:
                gap = max(gap, -self.support[k] - self.support[j])
        return gap

    def to_json(self):
        return {
            "directions": self.directions.tolist(),
            "support": self.support.tolist(),
            "tol": self.tol,
        }


def clarke_subdifferential(f, a, grid: int, sched: ScaleSchedule, domain=None,
                           tol: float = SLOPE_TOL) -> ConvexSetApprox:
    """Generalized gradient as support values f°(a; v_j) on a direction grid."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    lipschitz_gate(f, a, domain=domain, r0=sched.r0)
    dirs = sampling.direction_grid(a.size, grid)
    support = np.empty(dirs.shape[0])
    unstable = []
    for j, v in enumerate(dirs):
        dd = clarke_directional(f, a, v, sched, domain=domain, gate=False)
        support[j] = dd.value
        if not dd.stabilized:
            unstable.append(j)
    if unstable:
        raise UnstableEstimate(
            f"{len(unstable)} direction(s) failed to stabilize"
        )
    return ConvexSetApprox(directions=dirs, support=support, tol=tol)


# ---------------------------------------------------------------------------
# Fréchet / limiting membership


def frechet_quotient_estimate(f, x, v, sched: ScaleSchedule, domain=None) -> float:
    """liminf estimate of (f(y) - f(x) - <v, y-x>)/|y-x| as y -> x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    fx = kernels.evaluate(f, x)
    dim = x.size
    m = sched.samples_per_level
    per_level = []
    for lvl, r in enumerate(sched.radii()):
        u = sampling.stream(dim + 1, m, sched.seed, _FRECHET_TAG + lvl)
        dirs = sampling.sphere_directions(u[:, :dim])
        radial = sampling.log_scales(u[:, dim], pair_floor(r), r)
        y = x + radial[:, None] * dirs
        if domain is not None:
            y = y[domain.contains(y)]
        d = np.linalg.norm(y - x, axis=1)
        keep = d > 0
        y, d = y[keep], d[keep]
        if y.shape[0] == 0:
            per_level.append(math.inf)
            continue
        vals = kernels.evaluate_batch(f, y)
        q = (vals - fx - (y - x) @ v) / d
        per_level.append(float(q.min()))
    tail = [p for p in per_level[-3:] if math.isfinite(p)]
    if not tail:
        raise UnstableEstimate("no admissible approach samples near x")
    return min(tail)


def frechet_member(f, x, v, sched: ScaleSchedule, tol: float = SLOPE_TOL,
                   domain=None) -> bool:
    return frechet_quotient_estimate(f, x, v, sched, domain=domain) >= -tol


def limiting_subdifferential(f, x, candidates, sched: ScaleSchedule,
                             domain=None, tol: float = SLOPE_TOL,
                             points_per_level: int = 8,
                             perturbations: int = 4):
    """Accepted candidates v: at every level k some sampled (x', v') with
    |x' - x| <= r_k, |v' - v| <= r_k passes the Fréchet test.

    The Fréchet test at x' runs on a schedule anchored at r_k (its own full
    limit, at the scale x' was sampled at)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dim = x.size
    accepted = []
    for v in candidates:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        ok = True
        for lvl, r in enumerate(sched.radii()):
            inner = ScaleSchedule(
                r0=r, rho=sched.rho, levels=min(6, sched.levels),
                samples_per_level=64, seed=sched.seed,
            )
            pts = [x] + list(
                sampling.ball_points(x, r, points_per_level, sched.seed,
                                     _LIMITING_TAG + lvl)
            )
            vs = [v] + list(
                v + r * sampling.cube_to_ball(
                    sampling.stream(dim, perturbations, sched.seed,
                                    _LIMITING_TAG + 0x100 + lvl)
                )
            )
            found = False
            for xp in pts:
                if domain is not None and not domain.contains(np.atleast_2d(xp))[0]:
                    continue
                for vp in vs:
                    if frechet_member(f, xp, vp, inner, tol=tol, domain=domain):
                        found = True
                        break
                if found:
                    break
            if not found:
                ok = False
                break
        if ok:
            accepted.append(v if v.size > 1 else float(v[0]))
    return accepted


# ---------------------------------------------------------------------------
# secant set vs generalized gradient


def _interval_union_hausdorff(a_intervals, b_intervals) -> float:
    """Exact Hausdorff distance between two finite unions of closed intervals."""

    def dist_to(x, intervals):
        return min(
            0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi))
            for lo, hi in intervals
        )

    def sup_dist(src, dst):
        worst = 0.0
        for lo, hi in src:
            worst = max(worst, dist_to(lo, dst), dist_to(hi, dst))
        # interior gap midpoints of dst that fall inside src intervals
        for (l1, h1), (l2, h2) in zip(dst, dst[1:]):
            mid = 0.5 * (h1 + l2)
            for lo, hi in src:
                if lo <= mid <= hi:
                    worst = max(worst, mid - h1)
        return worst

    if not a_intervals or not b_intervals:
        return math.inf
    return max(sup_dist(a_intervals, b_intervals),
               sup_dist(b_intervals, a_intervals))


def _aligned_secant_support(f, a, v, sched: ScaleSchedule, domain=None) -> float:
    """Max achieved secant slope along direction v with both ends near a:
    the secant-based support value in direction v."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    dim = a.size
    m = sched.samples_per_level
    per_level = []
    for lvl, r in enumerate(sched.radii()):
        u = sampling.stream(dim + 1, m, sched.seed, 0xA0 + lvl)
        p = a + r * sampling.cube_to_ball(u[:, :dim])
        sep = sampling.log_scales(u[:, dim], pair_floor(r), r)
        q = p - sep[:, None] * v
        outside = np.linalg.norm(q - a, axis=1) > r
        if np.any(outside):
            q_alt = p + sep[:, None] * v
            swap = outside & (np.linalg.norm(q_alt - a, axis=1) <= r)
            # moving the far end to the other side keeps the secant direction
            p[swap], q[swap] = q_alt[swap], p[swap].copy()
            outside = np.linalg.norm(q - a, axis=1) > r
        keep = ~outside
        if domain is not None:
            keep &= domain.contains(p) & domain.contains(q)
        p, q, sep = p[keep], q[keep], sep[keep]
        if p.shape[0] == 0:
            per_level.append(-math.inf)
            continue
        vals = kernels.evaluate_batch(f, np.concatenate([p, q], axis=0))
        per_level.append(float(((vals[: p.shape[0]] - vals[p.shape[0]:]) / sep).max()))
    tail = [pl for pl in per_level[-3:] if math.isfinite(pl)]
    if not tail:
        raise UnstableEstimate("no admissible aligned pairs near a")
    return max(tail)


@dataclass(frozen=True)
class CompareReport:
    hausdorff: float
    passed: bool
    clarke: dict
    btc: dict
    note: str = ""
    boundary_checks: tuple = ()

    def to_json(self):
        out = {
            "hausdorff": self.hausdorff,
            "passed": self.passed,
            "clarke": self.clarke,
            "btc": self.btc,
        }
        if self.note:
            out["note"] = self.note
        if self.boundary_checks:
            out["boundary_checks"] = list(self.boundary_checks)
        return out


def _support_polygon_vertices(dirs, support):
    """Vertices of the 2-D polygon cut out by <xi, v_j> <= h_j (adjacent
    halfplane intersections; dirs must be sorted by angle)."""
    out = []
    J = dirs.shape[0]
    for j in range(J):
        v1, v2 = dirs[j], dirs[(j + 1) % J]
        h1, h2 = support[j], support[(j + 1) % J]
        det = v1[0] * v2[1] - v1[1] * v2[0]
        if abs(det) < 1e-12:
            continue
        xi = np.array([
            (h1 * v2[1] - h2 * v1[1]) / det,
            (v1[0] * h2 - v2[0] * h1) / det,
        ])
        if np.all(dirs @ xi <= support + 1e-6):
            out.append(xi)
    return out


def compare_clarke_btc(f, a, sched: ScaleSchedule, tol: float = SLOPE_TOL,
                       grid: int = 64, domain=None) -> CompareReport:
    """Compare the directional-derivative set and the secant-slope set at a.

    In 1-D both are intervals and the Hausdorff distance is exact.  In n-D
    the distance is the max support-value discrepancy over the direction
    grid (the support identity for convex sets), and polygon vertices of the
    directional-derivative set are additionally membership-checked against
    the secant cone.  Raises NotLipschitz when the gate refuses.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    lipschitz_gate(f, a, domain=domain, r0=sched.r0)
    if a.size == 1:
        cl = clarke_subdifferential(f, a, 2, sched, domain=domain, tol=tol)
        lo, hi = cl.interval()
        bt = btc_subdifferential_1d(f, float(a[0]), sched, domain=domain)
        h = _interval_union_hausdorff([(lo, hi)], list(bt.slopes.intervals))
        if bt.slopes.infinity:
            h = math.inf
        return CompareReport(
            hausdorff=float(h),
            passed=bool(h <= tol),
            clarke={"interval": [lo, hi]},
            btc=bt.to_json(),
        )
    cl = clarke_subdifferential(f, a, grid, sched, domain=domain, tol=tol)
    h_btc = np.array([
        _aligned_secant_support(f, a, v, sched, domain=domain)
        for v in cl.directions
    ])
    h = float(np.max(np.abs(cl.support - h_btc)))
    checks = []
    if a.size == 2:
        est = estimate_btc_cone(f, a, sched, domain=domain)
        for xi in _support_polygon_vertices(cl.directions, cl.support):
            # worst violation of the secant-side support by the boundary candidate
            viol = float(np.max(cl.directions @ xi - h_btc))
            gdir = np.concatenate([xi, [float(np.dot(xi, xi))]])
            nrm = np.linalg.norm(gdir)
            checks.append({
                "candidate": xi.tolist(),
                "support_violation": viol,
                "cone_angle": est.directions.min_angle_to(gdir / nrm)
                if nrm > 0 else 0.0,
            })
    return CompareReport(
        hausdorff=h,
        passed=bool(h <= tol),
        clarke=cl.to_json(),
        btc={"support": h_btc.tolist(), "directions": cl.directions.tolist()},
        note="support values compared on a finite direction grid of "
             f"{cl.directions.shape[0]} points",
        boundary_checks=tuple(checks),
    )
