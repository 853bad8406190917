"""Certifying searches for the generalized mean-value results.

Every search follows the same deterministic recipe: verify the boundary
hypothesis, scan a coarse interior grid, refine the most promising points
(plus the interior extrema of the reduced function, which is where the
existence arguments locate mean points), then certify the best candidate
against the full-schedule estimate.  Rolle/Lagrange break ties by the
lexicographically smallest point; the segment search breaks ties by
closeness to the segment midpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, sampling
from .cones import (
    ScaleSchedule,
    _pair_level,
    estimate_peano_cone,
    normal_cone_member,
)
from .errors import (
    BoundaryHypothesisFailed,
    NoCertificate,
    NormalMembershipFailed,
    NotLipschitz,
)
from .expr.ast import arity
from .expr.domain import Box, Disk
from .expr.lipschitz import lipschitz_estimate
from .expr.parser import parse
from .expr.calculus import differentiate
from .geometry import LinearFunctional
from .subdiff import (
    SLOPE_TOL,
    _aligned_secant_support,
    btc_subdifferential_1d,
    clarke_directional,
    lipschitz_gate,
)

_REFINE_XTOL = 1e-6
_RESIDUAL_ROUND = 6


@dataclass(frozen=True)
class MeanValueCertificate:
    theorem: str
    c: np.ndarray
    target: dict
    residual: float
    boundary_residual: float
    valid: bool
    witness: dict

    def to_json(self):
        return {
            "theorem": self.theorem,
            "c": self.c.tolist() if self.c.size > 1 else float(self.c[0]),
            "target": self.target,
            "residual": self.residual,
            "boundary_residual": self.boundary_residual,
            "valid": self.valid,
            "witness": self.witness,
        }


def _as_functional(L, dim) -> LinearFunctional:
    if isinstance(L, LinearFunctional):
        return L
    arr = np.atleast_1d(np.asarray(L, dtype=float))
    if arr.size == 1 and dim > 1:
        arr = np.full(dim, float(arr[0]))
    return LinearFunctional(tuple(arr))


def check_boundary_affine(f, domain, L, C: float, grid: int = 256) -> float:
    """max over sampled boundary points of |f(x) - L.x - C|."""
    L = _as_functional(L, domain.dim)
    pts = (domain.boundary_points(720) if isinstance(domain, Disk)
           else domain.boundary_points(grid))
    vals = kernels.evaluate_batch(f, pts)
    return float(np.max(np.abs(vals - L(pts) - C)))


# ---------------------------------------------------------------------------
# deterministic local refinement


def _golden_min(fun, lo: float, hi: float, xtol: float = _REFINE_XTOL) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _pattern_min(fun, x0, step: float, domain, xtol: float = _REFINE_XTOL):
    offsets = []
    dim = x0.size
    for mask in range(3 ** dim):
        off = np.zeros(dim)
        m = mask
        for i in range(dim):
            off[i] = (m % 3) - 1
            m //= 3
        if np.any(off != 0):
            offsets.append(off)
    x = x0.copy()
    fx = fun(x)
    while step > xtol:
        best_x, best_f = x, fx
        for off in offsets:
            y = domain.clip(x + step * off)[0]
            fy = fun(y)
            if fy < best_f - 1e-15:
                best_x, best_f = y, fy
        if best_f < fx - 1e-15:
            x, fx = best_x, best_f
        else:
            step *= 0.5
    return x


def _refine_min(fun, c, cell, interior):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 1:
        lo = max(float(interior.lo[0]), float(c[0]) - cell)
        hi = min(float(interior.hi[0]), float(c[0]) + cell)
        return np.array([_golden_min(lambda t: fun(np.array([t])), lo, hi)])
    return _pattern_min(fun, c, cell, interior)


# ---------------------------------------------------------------------------
# slope residuals (distance from a target functional to the secant set)


def _scan_residual(f, c, L: LinearFunctional, r_scan: float, m: int, seed: int,
                   domain, dirs):
    """One-radius residual used only to rank grid points during the scan."""
    c = np.atleast_1d(c)
    dim = c.size
    if dim == 1:
        P, Q, fP, fQ, _ = _pair_level(f, domain, c, r_scan, m, seed, 0)
        if P.shape[0] == 0:
            return math.inf
        slopes = (fP - fQ) / (P - Q)[:, 0]
        target = L.coeffs[0]
        return float(max(0.0, target - slopes.max(), slopes.min() - target))
    worst = 0.0
    for v in dirs:
        hi = _one_level_aligned(f, c, v, r_scan, m, seed, domain)
        lo = -_one_level_aligned(f, c, -v, r_scan, m, seed, domain)
        if hi is None or lo is None:
            return math.inf
        t = float(L(v))
        worst = max(worst, max(0.0, t - hi, lo - t))
    return worst


def _one_level_aligned(f, a, v, r, m, seed, domain):
    u = sampling.stream(a.size + 1, m, seed, 0xB0)
    p = a + r * sampling.cube_to_ball(u[:, : a.size])
    sep = sampling.log_scales(u[:, a.size], max(1e-9 * r, 1e-13), r)
    q = p - sep[:, None] * v
    keep = np.ones(m, dtype=bool)
    if domain is not None:
        keep = domain.contains(p) & domain.contains(q)
    p, q, sep = p[keep], q[keep], sep[keep]
    if p.shape[0] == 0:
        return None
    vals = kernels.evaluate_batch(f, np.concatenate([p, q], axis=0))
    return float(((vals[: p.shape[0]] - vals[p.shape[0]:]) / sep).max())


def _final_residual(f, c, L: LinearFunctional, sched: ScaleSchedule, domain, dirs):
    """Certificate residual at the full schedule."""
    c = np.atleast_1d(c)
    if c.size == 1:
        est = btc_subdifferential_1d(f, float(c[0]), sched, domain=domain)
        return est.slopes.distance(L.coeffs[0]), est
    worst = 0.0
    for v in dirs:
        hi = _aligned_secant_support(f, c, v, sched, domain=domain)
        lo = -_aligned_secant_support(f, c, -v, sched, domain=domain)
        t = float(L(v))
        worst = max(worst, max(0.0, t - hi, lo - t))
    return worst, None


def _witness_pairs(f, c, L: LinearFunctional, sched: ScaleSchedule, domain, count=8):
    c = np.atleast_1d(c)
    if c.size != 1:
        return []
    r = sched.finest_radius
    P, Q, fP, fQ, _ = _pair_level(f, domain, c, r, sched.samples_per_level,
                                  sched.seed, sched.levels - 1)
    if P.shape[0] == 0:
        return []
    slopes = (fP - fQ) / (P - Q)[:, 0]
    order = np.argsort(np.abs(slopes - L.coeffs[0]), kind="stable")[:count]
    return [
        {"p": float(P[i, 0]), "q": float(Q[i, 0]), "slope": float(slopes[i])}
        for i in order
    ]


# ---------------------------------------------------------------------------
# Rolle / Lagrange


def _interior_grid(domain, per_axis):
    cell = float(np.max(
        (domain.bounding_box().widths() if not isinstance(domain, Box)
         else domain.widths())
    )) / (per_axis + 1)
    interior = domain.shrink(cell)
    return interior, interior.grid(per_axis), cell


def _certify_functional(f, domain, L: LinearFunctional, C, sched, tol,
                        grid, theorem, boundary_residual):
    dim = domain.dim
    interior, pts, cell = _interior_grid(domain, grid if dim == 1 else min(grid, 48))
    scan_m = 128
    scan_r = max(sched.finest_radius * 8, 1e-4)
    dirs = sampling.direction_grid(dim, 8) if dim > 1 else None

    fvals = kernels.evaluate_batch(f, pts)
    gvals = fvals - L(pts)

    res = np.array([
        _scan_residual(f, p, L, scan_r, scan_m, sched.seed, domain, dirs)
        for p in pts
    ])
    order = np.lexsort((np.arange(len(pts)), np.round(res, _RESIDUAL_ROUND)))
    candidates = [pts[i] for i in order[:5]]
    candidates.append(pts[int(np.argmin(gvals))])
    candidates.append(pts[int(np.argmax(gvals))])

    def gfun(x):
        return float(kernels.evaluate(f, x) - L(np.atleast_1d(x)))

    refined = []
    for k, c0 in enumerate(candidates):
        if k < 5:
            obj = lambda x: _scan_residual(f, x, L, scan_r, scan_m, sched.seed,
                                           domain, dirs)
        elif k == 5:
            obj = gfun
        else:
            obj = lambda x: -gfun(x)
        refined.append(_refine_min(obj, c0, cell, interior))

    # dedupe refined candidates
    unique = []
    for c in refined:
        if not any(np.linalg.norm(c - u) < 1e-7 for u in unique):
            unique.append(c)

    scored = []
    for c in unique:
        residual, est = _final_residual(f, c, L, sched, domain, dirs)
        scored.append((round(residual, _RESIDUAL_ROUND), tuple(np.round(c, 9)),
                       residual, c, est))
    scored.sort(key=lambda t: (t[0], t[1]))
    best = scored[0]
    residual, c = best[2], best[3]
    target = {"kind": "zero" if all(v == 0 for v in L.coeffs) else "functional",
              "value": list(L.coeffs) if dim > 1 else float(L.coeffs[0])}
    cert = MeanValueCertificate(
        theorem=theorem,
        c=np.atleast_1d(c),
        target=target,
        residual=float(residual),
        boundary_residual=float(boundary_residual),
        valid=bool(residual <= tol and boundary_residual <= tol),
        witness={"pairs": _witness_pairs(f, c, L, sched, domain)},
    )
    if not cert.valid:
        raise NoCertificate(cert)
    return cert


def rolle_search(f, domain, C: float, sched: ScaleSchedule,
                 tol: float = SLOPE_TOL, grid: int = 64) -> MeanValueCertificate:
    """Interior point c whose secant-slope set contains 0, given f == C on
    the boundary."""
    L = _as_functional(np.zeros(domain.dim), domain.dim)
    br = check_boundary_affine(f, domain, L, C)
    if br > tol:
        raise BoundaryHypothesisFailed(br, tol)
    return _certify_functional(f, domain, L, C, sched, tol, grid, "rolle", br)


def lagrange_search(f, domain, L, C: float, sched: ScaleSchedule,
                    tol: float = SLOPE_TOL, grid: int = 64) -> MeanValueCertificate:
    """Interior point c whose secant-slope set contains L, given f == L.x + C
    on the boundary.  Reduces to the zero-target search on f - L.x."""
    L = _as_functional(L, domain.dim)
    br = check_boundary_affine(f, domain, L, C)
    if br > tol:
        raise BoundaryHypothesisFailed(br, tol)
    cert = _certify_functional(f, domain, L, C, sched, tol, grid, "lagrange", br)
    return cert


# ---------------------------------------------------------------------------
# normal-cone Lagrange


def normal_lagrange_search(f, domain, L, C: float, grid: int = 64,
                           tol: float = SLOPE_TOL,
                           sched: ScaleSchedule | None = None) -> MeanValueCertificate:
    """Point c where the normal cone of the graph holds a nonzero vector
    perpendicular to the graph of L.

    Maximizes the distance of (x, f(x) - C) from the graph subspace of L;
    at the maximizer the rejected component is the claimed normal vector,
    checked against the one-ended tangent cone estimate at c."""
    if sched is None:
        sched = ScaleSchedule()
    L = _as_functional(L, domain.dim)
    br = check_boundary_affine(f, domain, L, C)
    if br > tol:
        raise BoundaryHypothesisFailed(br, tol)
    w = L.graph_perp_unit()
    basis = L.graph_basis()

    def gbatch(pts):
        vals = kernels.evaluate_batch(f, pts) - C
        graph = np.concatenate([np.atleast_2d(pts), vals[:, None]], axis=1)
        return np.abs(graph @ w)

    interior, pts, cell = _interior_grid(domain, grid if domain.dim == 1 else 48)
    gv = gbatch(pts)
    c0 = pts[int(np.argmax(gv))]
    c = _refine_min(lambda x: -float(gbatch(np.atleast_2d(x))[0]), c0, cell, interior)
    gmax = float(gbatch(np.atleast_2d(c))[0])

    if gmax <= tol:
        # f is affine with graph parallel to L: every interior point works
        c = interior.center()
        v = w
        affine = True
    else:
        fc = kernels.evaluate(f, c) - C
        v = float(np.dot(np.concatenate([np.atleast_1d(c), [fc]]), w)) * w
        affine = False

    perp_residual = float(np.max(np.abs(basis @ v)))
    cone = estimate_peano_cone(f, c, sched, domain=domain)
    member, worst = normal_cone_member(v, cone, tol)
    if not member:
        j = int(np.argmax(cone.directions.vectors @ (v / np.linalg.norm(v))))
        raise NormalMembershipFailed(worst, cone.directions.vectors[j].tolist())
    residual = max(worst, 0.0)
    return MeanValueCertificate(
        theorem="normal_lagrange",
        c=np.atleast_1d(c),
        target={"kind": "normal_vector", "value": v.tolist()},
        residual=float(residual),
        boundary_residual=float(br),
        valid=bool(residual <= tol and br <= tol and perp_residual <= 1e-9),
        witness={
            "projection_max": gmax,
            "affine_case": affine,
            "perp_residual": perp_residual,
        },
    )


# ---------------------------------------------------------------------------
# segment mean value (generalized-gradient form)


def _segment_gate(f, x, y, r0):
    lo = np.minimum(x, y) - r0 / 4.0
    hi = np.maximum(x, y) + r0 / 4.0
    box = Box(tuple(lo), tuple(hi))
    per_axis = 201 if x.size == 1 else 33
    coarse = lipschitz_estimate(f, box, per_axis)
    fine = lipschitz_estimate(f, box, 2 * per_axis - 1)
    top = max(coarse, fine)
    if top > 1e-12 and abs(coarse - fine) >= 0.25 * top:
        raise NotLipschitz(
            f"Lipschitz estimates do not stabilize on the segment "
            f"({coarse:.4g} vs {fine:.4g})",
            coarse=coarse,
            fine=fine,
        )


def lebourg_certify(f, x, y, sched: ScaleSchedule, tol: float = SLOPE_TOL,
                    grid: int = 64, domain=None) -> MeanValueCertificate:
    """Point c strictly between x and y with f(y) - f(x) inside the interval
    of inner products of the generalized gradient at c with y - x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _segment_gate(f, x, y, sched.r0)
    u = y - x
    s = kernels.evaluate(f, y) - kernels.evaluate(f, x)

    def point(theta):
        return x + theta * u

    scan_sched = sched.scaled(levels=min(8, sched.levels), samples=128)

    def interval_at(theta, schedule):
        c = point(theta)
        hi = clarke_directional(f, c, u, schedule, domain=domain, gate=False).value
        lo = -clarke_directional(f, c, -u, schedule, domain=domain, gate=False).value
        return lo, hi

    def residual_at(theta, schedule):
        lo, hi = interval_at(theta, schedule)
        return max(0.0, s - hi, lo - s), (lo, hi)

    thetas = np.arange(1, grid) / grid
    scan = np.array([residual_at(t, scan_sched)[0] for t in thetas])
    gvals = kernels.evaluate_batch(
        f, np.stack([point(t) for t in thetas])
    ) - kernels.evaluate(f, x) - thetas * s

    order = np.lexsort((np.abs(thetas - 0.5), np.round(scan, _RESIDUAL_ROUND)))
    cands = [float(thetas[i]) for i in order[:5]]
    for idx in (int(np.argmin(gvals)), int(np.argmax(gvals))):
        t0 = float(thetas[idx])
        sign = 1.0 if idx == int(np.argmin(gvals)) else -1.0

        def gw(t):
            return sign * (kernels.evaluate(f, point(t)) -
                           kernels.evaluate(f, x) - t * s)

        cands.append(_golden_min(gw, max(t0 - 1.0 / grid, 1e-6),
                                 min(t0 + 1.0 / grid, 1.0 - 1e-6)))

    scored = []
    for t in cands:
        r, (lo, hi) = residual_at(t, sched)
        scored.append((round(r, _RESIDUAL_ROUND), abs(t - 0.5), t, r, (lo, hi)))
    scored.sort(key=lambda z: (z[0], z[1], z[2]))
    _, _, theta, residual, (lo, hi) = scored[0]
    c = point(theta)
    cert = MeanValueCertificate(
        theorem="lebourg",
        c=c,
        target={"kind": "functional", "value": float(s)},
        residual=float(residual),
        boundary_residual=0.0,
        valid=bool(residual <= tol),
        witness={
            "theta": float(theta),
            "gradient_pairing_interval": [float(lo), float(hi)],
            "difference": float(s),
        },
    )
    if not cert.valid:
        raise NoCertificate(cert)
    return cert


# ---------------------------------------------------------------------------
# the documented non-compact counterexample


def noncompact_counterexample_report(grid: int = 101, tol: float = SLOPE_TOL):
    """The saddle-like product function on an unbounded vertical strip:
    boundary values are affine, yet no interior point carries the needed
    functional, because the strip is not compact.

    Verifies the gradient stays a fixed margin away from the target
    functional on interior grids of two resolutions, and that the
    compact-truncation search refuses the boundary hypothesis."""
    f = parse("x0^2*x1")
    gx = differentiate(f, 0)
    gy = differentiate(f, 1)
    inner = Box((-0.9, -10.0), (0.9, 10.0))

    def margin(per_axis):
        pts = inner.grid(per_axis)
        g1 = kernels.evaluate_batch(gx, pts)
        g2 = kernels.evaluate_batch(gy, pts)
        return float(np.min(np.hypot(g1, g2 - 1.0)))

    m1 = margin(grid)
    m2 = margin(2 * grid - 1)

    refused = False
    refusal_residual = None
    try:
        lagrange_search(
            f,
            Box((-1.0, -1.0), (1.0, 1.0)),
            LinearFunctional((0.0, 1.0)),
            0.0,
            ScaleSchedule(levels=6, samples_per_level=64),
            tol=tol,
        )
    except BoundaryHypothesisFailed as exc:
        refused = True
        refusal_residual = exc.residual

    return {
        "margin": m1,
        "margin_refined": m2,
        "grid_stable": bool(abs(m1 - m2) <= 1e-3),
        "truncated_search_refused": refused,
        "refusal_boundary_residual": refusal_residual,
        "passed": bool(m1 >= 0.19 - 1e-9 and abs(m1 - m2) <= 1e-3 and refused),
    }
