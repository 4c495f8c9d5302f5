"""Prox-regular set primitives in R^d.

Every set knows its exact distance function, a nearest-point map, and its
prox-regularity constant ``rho`` (``math.inf`` for convex sets).  Convex
kinds also expose ``linear_min(v) = inf_{y in S} <v, y>``, which is what the
residual needs when ``rho`` is infinite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_GAMMA = 0.9
DEFAULT_TOL = 1e-9

# relative tolerance used to decide that v is parallel to a halfspace normal
PARALLEL_TOL = 1e-10


class GeometryError(Exception):
    pass


class OutOfReach(GeometryError):
    """The point lies outside the open gamma*rho enlargement of the set."""

    def __init__(self, dist: float, reach: float):
        super().__init__(f"point at distance {dist:.6g} is outside the prox reach {reach:.6g}")
        self.dist = dist
        self.reach = reach


class InfeasiblePoint(GeometryError):
    def __init__(self, dist: float, tol: float):
        super().__init__(f"point is at distance {dist:.3e} from the set (tol {tol:.1e})")
        self.dist = dist
        self.tol = tol


def _norm(vec: np.ndarray) -> float:
    # same value as np.linalg.norm for 1-d input, without its dispatch cost
    return math.sqrt(float(vec @ vec))


def as_point(p) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    return arr


def _unit(vec: np.ndarray) -> np.ndarray | None:
    n = _norm(vec)
    if n == 0.0:
        return None
    return vec / n


def _any_unit(dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[0] = 1.0
    return e


class ProxSet:
    """Base class for the supported closed, rho-uniformly prox-regular sets."""

    dim: int

    @property
    def rho(self) -> float:
        raise NotImplementedError

    @property
    def is_convex(self) -> bool:
        return math.isinf(self.rho)

    def distance(self, p: np.ndarray) -> float:
        raise NotImplementedError

    def nearest(self, p: np.ndarray) -> np.ndarray:
        """A nearest point of the set to ``p`` (unique inside the reach)."""
        raise NotImplementedError

    def linear_min(self, v: np.ndarray) -> float:
        """``inf_{y in S} <v, y>``; only defined for convex kinds."""
        raise NotImplementedError(f"{type(self).__name__} has no support function")

    def contains(self, p, tol: float = DEFAULT_TOL) -> bool:
        return self.distance(as_point(p)) <= tol

    def translate(self, shift) -> "ProxSet":
        shift = as_point(shift)
        if not np.any(shift):
            return self
        return Translate(self, shift)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Finite axis-aligned box enclosing the set, or ``None`` if unbounded."""
        return None


@dataclass(frozen=True, eq=False)
class Halfspace(ProxSet):
    """``{y : <normal, y> <= offset}``; the normal is stored normalized."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_point(self.normal)
        norm = _norm(n)
        if norm == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    @property
    def dim(self) -> int:
        return self.normal.size

    @property
    def rho(self) -> float:
        return math.inf

    def distance(self, p):
        return max(0.0, float(self.normal @ p) - self.offset)

    def nearest(self, p):
        excess = float(self.normal @ p) - self.offset
        if excess <= 0.0:
            return p.copy()
        return p - excess * self.normal

    def linear_min(self, v):
        # bounded below only when v = -lam * normal with lam >= 0
        lam = -float(self.normal @ v)
        tangential = v + lam * self.normal
        if lam < 0.0 or _norm(tangential) > PARALLEL_TOL * max(1.0, _norm(v)):
            if _norm(v) == 0.0:
                return 0.0
            return -math.inf
        return -lam * self.offset


@dataclass(frozen=True, eq=False)
class Ball(ProxSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    @property
    def rho(self):
        return math.inf

    def distance(self, p):
        return max(0.0, _norm(p - self.center) - self.radius)

    def nearest(self, p):
        d = p - self.center
        n = _norm(d)
        if n <= self.radius:
            return p.copy()
        return self.center + (self.radius / n) * d

    def linear_min(self, v):
        return float(v @ self.center) - self.radius * _norm(v)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True, eq=False)
class Box(ProxSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = as_point(self.lower), as_point(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have the same dimension")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    @property
    def rho(self):
        return math.inf

    def distance(self, p):
        return _norm(p - self.nearest(p))

    def nearest(self, p):
        return np.clip(p, self.lower, self.upper)

    def linear_min(self, v):
        return float(np.sum(np.minimum(v * self.lower, v * self.upper)))

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()


@dataclass(frozen=True, eq=False)
class ComplementOfOpenBall(ProxSet):
    """``{y : |y - center| >= radius}``, prox-regular with ``rho = radius``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ValueError("hole radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    @property
    def rho(self):
        return self.radius

    def distance(self, p):
        return max(0.0, self.radius - _norm(p - self.center))

    def nearest(self, p):
        d = p - self.center
        n = _norm(d)
        if n >= self.radius:
            return p.copy()
        u = d / n if n > 0.0 else _any_unit(self.dim)
        return self.center + self.radius * u


@dataclass(frozen=True, eq=False)
class Translate(ProxSet):
    base: ProxSet
    shift: np.ndarray

    def __post_init__(self):
        shift = as_point(self.shift)
        if shift.size != self.base.dim:
            raise ValueError("shift dimension does not match the base set")
        # flatten nested translations
        if isinstance(self.base, Translate):
            object.__setattr__(self, "shift", shift + self.base.shift)
            object.__setattr__(self, "base", self.base.base)
        else:
            object.__setattr__(self, "shift", shift)

    @property
    def dim(self):
        return self.base.dim

    @property
    def rho(self):
        return self.base.rho

    def distance(self, p):
        return self.base.distance(p - self.shift)

    def nearest(self, p):
        return self.base.nearest(p - self.shift) + self.shift

    def linear_min(self, v):
        return self.base.linear_min(v) + float(v @ self.shift)

    def bounding_box(self):
        bb = self.base.bounding_box()
        if bb is None:
            return None
        return bb[0] + self.shift, bb[1] + self.shift


def _untranslate(s: ProxSet) -> tuple[ProxSet, np.ndarray]:
    if isinstance(s, Translate):
        return s.base, s.shift
    return s, np.zeros(s.dim)


@dataclass(frozen=True, eq=False)
class IntersectBall(ProxSet):
    """``base ∩ B[center, radius]`` with ``radius < rho(base)``.

    Keeps ``rho(base)`` as its prox constant.  Supported bases are the convex
    kinds and ``ComplementOfOpenBall``, possibly translated.
    """

    base: ProxSet
    center: np.ndarray
    radius: float
    _core: ProxSet = field(init=False, repr=False)
    _offset: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("clip radius must be positive")
        if not self.radius < self.base.rho:
            raise ValueError("IntersectBall requires radius < rho(base)")
        core, offset = _untranslate(self.base)
        if isinstance(core, IntersectBall):
            raise ValueError("nested IntersectBall is not supported")
        object.__setattr__(self, "_core", core)
        object.__setattr__(self, "_offset", offset)
        # nonempty interior intersection: some point of base strictly inside the ball
        q = self.base.nearest(self.center)
        if self.base.distance(self.center) >= self.radius or _norm(q - self.center) >= self.radius:
            raise ValueError("IntersectBall needs base ∩ B(center, radius) to be nonempty")

    @property
    def dim(self):
        return self.center.size

    @property
    def rho(self):
        return self.base.rho

    def distance(self, p):
        return _norm(p - self.nearest(p))

    def nearest(self, p):
        # work in the untranslated frame of the base
        p0 = p - self._offset
        a0 = self.center - self._offset
        if isinstance(self._core, ComplementOfOpenBall):
            y = _nearest_hole_clip(self._core, a0, self.radius, p0)
        else:
            y = _nearest_convex_clip(self._core, a0, self.radius, p0)
        return y + self._offset

    def linear_min(self, v):
        if not self._core.is_convex:
            raise NotImplementedError("support function needs a convex base")
        a0 = self.center - self._offset
        value = _linear_min_convex_clip(self._core, a0, self.radius, v)
        return value + float(v @ self._offset)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


def _in_ball(y, a, r):
    return _norm(y - a) <= r * (1.0 + 1e-14) + 1e-15


def _nearest_convex_clip(base: ProxSet, a, r, p):
    """Projection onto convex ``base ∩ B[a, r]``.

    With a multiplier on the ball constraint the minimizer is
    ``proj_base((1 - t) p + t a)`` for some t in [0, 1]; ``|y(t) - a|`` is
    nonincreasing in t, so t is found by bisection.
    """
    y = base.nearest(p)
    if _in_ball(y, a, r):
        return y
    lo, hi = 0.0, 1.0
    y_hi = base.nearest(a)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        y_mid = base.nearest((1.0 - mid) * p + mid * a)
        if _norm(y_mid - a) > r:
            lo = mid
        else:
            hi, y_hi = mid, y_mid
    return y_hi


def _linear_min_convex_clip(base: ProxSet, a, r, v):
    """``min <v, y>`` over convex ``base ∩ B[a, r]`` via ``y(s) = proj_base(a - s v)``."""
    if not np.any(v):
        return 0.0

    def g(s):
        y = base.nearest(a - s * v)
        return _norm(y - a), y

    # past this step a - s v is far beyond the base's features, and larger
    # steps only cost precision in the projection
    scale = 1.0 + _norm(a) + r
    box = base.bounding_box()
    if box is not None:
        scale += float(np.max(np.abs(np.concatenate(box))))
    s_cap = 1e6 * scale / _norm(v)
    s_hi = 1.0
    gv, y = g(s_hi)
    while gv < r and s_hi < s_cap:
        s_hi = min(2.0 * s_hi, s_cap)
        gv, y = g(s_hi)
    if gv <= r:
        # ball constraint inactive: the base minimizer nearest to a lies inside
        return float(v @ y)
    s_lo = 0.0
    y_best = base.nearest(a)
    for _ in range(400):
        mid = 0.5 * (s_lo + s_hi)
        if mid <= s_lo or mid >= s_hi:
            break
        gm, ym = g(mid)
        if gm > r:
            s_hi = mid
        else:
            s_lo, y_best = mid, ym
    return float(v @ y_best)


def _nearest_hole_clip(hole: ComplementOfOpenBall, a, r, p):
    """Projection onto ``{|y - c| >= R} ∩ {|y - a| <= r}`` by enumerating KKT candidates."""
    c, big_r = hole.center, hole.radius
    dim = p.size
    cands = [p.copy()]

    u = _unit(p - a)
    cands.append(a + r * (u if u is not None else _any_unit(dim)))

    u = _unit(p - c)
    if u is None:
        u = _any_unit(dim)
    cands.append(c + big_r * u)
    cands.append(c - big_r * u)

    axis = a - c
    dist_ca = _norm(axis)
    if dist_ca > 0.0:
        e = axis / dist_ca
        along = (big_r**2 - r**2 + dist_ca**2) / (2.0 * dist_ca)
        beta2 = big_r**2 - along**2
        if beta2 >= 0.0:
            beta = math.sqrt(beta2)
            perp = (p - c) - float((p - c) @ e) * e
            w = _unit(perp)
            if w is None and dim > 1:
                # any direction orthogonal to e
                trial = np.eye(dim)[int(np.argmin(np.abs(e)))]
                w = _unit(trial - float(trial @ e) * e)
            base_pt = c + along * e
            if w is None:
                cands.append(base_pt)
            else:
                cands.append(base_pt + beta * w)
                cands.append(base_pt - beta * w)
    else:
        # concentric: annulus, radial clamp
        u = _unit(p - c)
        if u is None:
            u = _any_unit(dim)
        rad = min(max(_norm(p - c), big_r), r)
        cands.append(c + rad * u)

    best, best_d = None, math.inf
    for y in cands:
        if _norm(y - c) < big_r * (1.0 - 1e-14) - 1e-15:
            continue
        if not _in_ball(y, a, r):
            continue
        d = _norm(y - p)
        if d < best_d:
            best, best_d = y, d
    if best is None:
        raise GeometryError("no feasible projection candidate; intersection may be empty")
    return best


# -- module-level operations -------------------------------------------------


def distance(S: ProxSet, p) -> float:
    return S.distance(as_point(p))


def prox_constant(S: ProxSet) -> float:
    return S.rho


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"safety factor must lie in (0, 1), got {gamma}")
    return gamma


def project(S: ProxSet, p, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Nearest point of ``S`` to ``p``.

    Raises ``OutOfReach`` unless ``distance(S, p) < gamma * rho(S)``, the
    region where the projection is single-valued and
    ``(1 - gamma)^-1``-Lipschitz.
    """
    gamma = check_gamma(gamma)
    p = as_point(p)
    d = S.distance(p)
    reach = gamma * S.rho
    if not d < reach:
        raise OutOfReach(d, reach)
    return S.nearest(p)


def normal_cone_contains(S: ProxSet, x, zeta, gamma: float = DEFAULT_GAMMA, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``zeta`` is a proximal normal to ``S`` at ``x`` (up to ``tol``).

    Tests that ``x + s*zeta`` projects back onto ``x``, with
    ``s = gamma*rho/max(|zeta|, 1)`` (``s = 1`` for convex sets).
    """
    gamma = check_gamma(gamma)
    x, zeta = as_point(x), as_point(zeta)
    d = S.distance(x)
    if d > tol:
        raise InfeasiblePoint(d, tol)
    nz = _norm(zeta)
    if nz == 0.0:
        return True
    s = 1.0 if math.isinf(S.rho) else gamma * S.rho / max(nz, 1.0)
    # |s*zeta| <= gamma*rho < rho, so the nearest point is unique here
    q = x + s * zeta
    return _norm(S.nearest(q) - x) <= tol


def normal_deviation(S: ProxSet, x, zeta, gamma: float = DEFAULT_GAMMA) -> float:
    """``|proj(x + s*zeta) - x|`` for the step used by :func:`normal_cone_contains`."""
    x, zeta = as_point(x), as_point(zeta)
    nz = _norm(zeta)
    if nz == 0.0:
        return 0.0
    s = 1.0 if math.isinf(S.rho) else check_gamma(gamma) * S.rho / max(nz, 1.0)
    return _norm(S.nearest(x + s * zeta) - x)


def intersect_ball(base: ProxSet, center, radius: float) -> IntersectBall:
    return IntersectBall(base, as_point(center), radius)


def describe(S: ProxSet) -> dict:
    """Plain-data description, used for logs and JSON output."""
    if isinstance(S, Halfspace):
        return {"kind": "halfspace", "normal": S.normal.tolist(), "offset": S.offset}
    if isinstance(S, Ball):
        return {"kind": "ball", "center": S.center.tolist(), "radius": S.radius}
    if isinstance(S, Box):
        return {"kind": "box", "lower": S.lower.tolist(), "upper": S.upper.tolist()}
    if isinstance(S, ComplementOfOpenBall):
        return {"kind": "complement_ball", "center": S.center.tolist(), "radius": S.radius}
    if isinstance(S, Translate):
        return {"kind": "translate", "base": describe(S.base), "shift": S.shift.tolist()}
    if isinstance(S, IntersectBall):
        return {"kind": "intersect_ball", "base": describe(S.base), "center": S.center.tolist(), "radius": S.radius}
    raise TypeError(type(S))
