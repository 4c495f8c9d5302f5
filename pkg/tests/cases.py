"""Seeded random instances of every set kind, for property tests."""
from __future__ import annotations

import numpy as np

from proxsweep import geometry as geo

KINDS = [
    "halfspace",
    "ball",
    "box",
    "complement_ball",
    "translate",
    "intersect_convex",
    "intersect_hole",
]


def random_set(kind: str, dim: int, rng: np.random.Generator) -> geo.ProxSet:
    c = rng.uniform(-1.0, 1.0, dim)
    if kind == "halfspace":
        return geo.Halfspace(rng.standard_normal(dim), float(rng.uniform(-1.0, 1.0)))
    if kind == "ball":
        return geo.Ball(c, float(rng.uniform(0.3, 2.0)))
    if kind == "box":
        lo = rng.uniform(-1.5, 0.5, dim)
        return geo.Box(lo, lo + rng.uniform(0.2, 2.0, dim))
    if kind == "complement_ball":
        return geo.ComplementOfOpenBall(c, float(rng.uniform(0.3, 2.0)))
    if kind == "translate":
        inner = random_set(["ball", "box", "complement_ball"][int(rng.integers(3))], dim, rng)
        return geo.Translate(inner, rng.uniform(-2.0, 2.0, dim))
    if kind == "intersect_convex":
        base = random_set(["ball", "box", "halfspace"][int(rng.integers(3))], dim, rng)
        a = base.nearest(rng.uniform(-1.5, 1.5, dim))
        return geo.IntersectBall(base, a + 0.3 * rng.standard_normal(dim), float(rng.uniform(0.6, 2.0)))
    if kind == "intersect_hole":
        r_hole = float(rng.uniform(0.8, 2.0))
        base = geo.ComplementOfOpenBall(c, r_hole)
        u = rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        r = float(rng.uniform(0.2, 0.95)) * r_hole
        # centre within r of the sphere so the intersection has interior
        a = c + u * (r_hole + float(rng.uniform(-0.8, 0.8)) * r)
        return geo.IntersectBall(base, a, r)
    raise ValueError(kind)


def sample_point(S: geo.ProxSet, rng: np.random.Generator, scale: float = 2.0) -> np.ndarray:
    """A point near ``S``: its bounding box when it has one, else around the origin."""
    box = S.bounding_box()
    if box is None:
        return rng.uniform(-scale, scale, S.dim)
    lo, hi = box
    pad = 0.5 * (hi - lo) + 0.2
    return rng.uniform(lo - pad, hi + pad)


def feasible_point(S: geo.ProxSet, rng: np.random.Generator) -> np.ndarray:
    """Half the time a boundary point, otherwise an interior point when one is found."""
    if rng.random() < 0.5:
        for _ in range(50):
            p = sample_point(S, rng)
            if S.distance(p) == 0.0:
                return p
    p = sample_point(S, rng)
    return S.nearest(p)
