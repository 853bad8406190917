"""Domains functions are analyzed over: axis-aligned boxes and 2-D disks.

Both are convex, so clipping a point toward the domain never increases its
distance to an interior anchor — the sampling code relies on that.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must be nonempty and of equal length")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError("box requires lo_i <= hi_i")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def lo_array(self):
        return np.asarray(self.lo, dtype=float)

    def hi_array(self):
        return np.asarray(self.hi, dtype=float)

    def contains(self, pts, slack=0.0):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.all(
            (pts >= self.lo_array() - slack) & (pts <= self.hi_array() + slack),
            axis=1,
        )

    def clip(self, pts):
        return np.clip(np.atleast_2d(np.asarray(pts, dtype=float)),
                       self.lo_array(), self.hi_array())

    def center(self):
        return 0.5 * (self.lo_array() + self.hi_array())

    def widths(self):
        return self.hi_array() - self.lo_array()

    def shrink(self, delta: float) -> "Box":
        """Box pulled inward by delta on every side (capped at the center)."""
        lo, hi = self.lo_array(), self.hi_array()
        half = 0.5 * (hi - lo)
        d = np.minimum(delta, half)
        return Box(tuple(lo + d), tuple(hi - d))

    def grid(self, per_axis: int):
        """Inclusive uniform grid, per_axis points per coordinate, as (m, n)."""
        axes = [
            np.linspace(self.lo[i], self.hi[i], per_axis) for i in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def boundary_points(self, per_face: int):
        """Dense samples of the topological boundary."""
        if self.dim == 1:
            return np.array([[self.lo[0]], [self.hi[0]]])
        if self.dim == 2:
            xs = np.linspace(self.lo[0], self.hi[0], per_face)
            ys = np.linspace(self.lo[1], self.hi[1], per_face)
            edges = [
                np.stack([xs, np.full_like(xs, self.lo[1])], axis=1),
                np.stack([xs, np.full_like(xs, self.hi[1])], axis=1),
                np.stack([np.full_like(ys, self.lo[0]), ys], axis=1),
                np.stack([np.full_like(ys, self.hi[0]), ys], axis=1),
            ]
            return np.concatenate(edges, axis=0)
        # n >= 3: per_face points on each of the 2n faces via a coarse grid
        pts = []
        side = max(2, int(round(per_face ** (1.0 / max(self.dim - 1, 1)))))
        for axis in range(self.dim):
            sub = Box(
                tuple(v for i, v in enumerate(self.lo) if i != axis),
                tuple(v for i, v in enumerate(self.hi) if i != axis),
            )
            face = sub.grid(side)
            for value in (self.lo[axis], self.hi[axis]):
                full = np.insert(face, axis, value, axis=1)
                pts.append(full)
        return np.concatenate(pts, axis=0)

    def bounding_box(self) -> "Box":
        return self

    def to_json(self):
        return {"box": [[l, h] for l, h in zip(self.lo, self.hi)]}


@dataclass(frozen=True)
class Disk:
    center_x: float
    center_y: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("disk radius must be positive")

    @property
    def dim(self) -> int:
        return 2

    def center(self):
        return np.array([self.center_x, self.center_y], dtype=float)

    def contains(self, pts, slack=0.0):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = np.linalg.norm(pts - self.center(), axis=1)
        return d <= self.radius + slack

    def clip(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float)).copy()
        delta = pts - self.center()
        d = np.linalg.norm(delta, axis=1)
        outside = d > self.radius
        scale = np.ones_like(d)
        scale[outside] = self.radius / d[outside]
        return self.center() + delta * scale[:, None]

    def shrink(self, delta: float) -> "Disk":
        return Disk(self.center_x, self.center_y,
                    max(self.radius - delta, self.radius * 1e-6))

    def grid(self, per_axis: int):
        box = self.bounding_box()
        pts = box.grid(per_axis)
        return pts[self.contains(pts)]

    def boundary_points(self, count: int = 720):
        t = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return self.center() + self.radius * np.stack(
            [np.cos(t), np.sin(t)], axis=1
        )

    def bounding_box(self) -> Box:
        return Box(
            (self.center_x - self.radius, self.center_y - self.radius),
            (self.center_x + self.radius, self.center_y + self.radius),
        )

    def to_json(self):
        return {"disk": {"center": [self.center_x, self.center_y],
                         "radius": self.radius}}


def domain_from_json(obj, dim_hint=None):
    """Build a Box or Disk from its JSON form; default box if obj is None."""
    if obj is None:
        n = dim_hint if dim_hint else 1
        return Box((-1.0,) * n, (1.0,) * n)
    if "box" in obj:
        pairs = obj["box"]
        return Box(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
    if "disk" in obj:
        d = obj["disk"]
        return Disk(d["center"][0], d["center"][1], d["radius"])
    raise ValueError("domain must specify 'box' or 'disk'")
