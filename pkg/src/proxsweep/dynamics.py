"""Moving sets ``t -> C(t)`` built from translated prox-regular pieces."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import ProxSet, as_point


class DynamicsError(Exception):
    pass


class OutOfHorizon(DynamicsError):
    pass


class CrossesJump(DynamicsError):
    pass


# -- motion paths ---------------------------------------------------------------


class MotionPath:
    dim: int

    def __call__(self, t: float) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Constant(MotionPath):
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "shift", as_point(self.shift))

    @property
    def dim(self):
        return self.shift.size

    def __call__(self, t):
        return self.shift.copy()


@dataclass(frozen=True, eq=False)
class PiecewiseLinear(MotionPath):
    """Linear interpolation between ``(time, shift)`` knots, constant outside."""

    times: np.ndarray
    shifts: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        shifts = np.asarray(self.shifts, dtype=float)
        if shifts.ndim == 1:
            shifts = shifts[:, None]
        if times.ndim != 1 or times.size < 1 or shifts.shape[0] != times.size:
            raise ValueError("piecewise-linear path needs matching knot times and shifts")
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "shifts", shifts)

    @classmethod
    def from_knots(cls, knots):
        times = [k[0] for k in knots]
        shifts = [np.atleast_1d(np.asarray(k[1], dtype=float)) for k in knots]
        return cls(np.array(times), np.vstack(shifts))

    @property
    def dim(self):
        return self.shifts.shape[1]

    def __call__(self, t):
        ts = self.times
        if t <= ts[0]:
            return self.shifts[0].copy()
        if t >= ts[-1]:
            return self.shifts[-1].copy()
        j = bisect.bisect_right(ts.tolist(), t) - 1
        lam = (t - ts[j]) / (ts[j + 1] - ts[j])
        return (1.0 - lam) * self.shifts[j] + lam * self.shifts[j + 1]


@dataclass(frozen=True, eq=False)
class Sinusoidal(MotionPath):
    """``amplitude * sin(frequency * t + phase) * direction``."""

    amplitude: float
    frequency: float
    phase: float
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "direction", as_point(self.direction))

    @property
    def dim(self):
        return self.direction.size

    def __call__(self, t):
        return self.amplitude * math.sin(self.frequency * t + self.phase) * self.direction


@dataclass(frozen=True, eq=False)
class Circular(MotionPath):
    """``radius * (cos(w t + phase), sin(w t + phase))`` in the plane of the first two axes."""

    radius: float
    frequency: float = 1.0
    phase: float = 0.0
    dimension: int = 2

    @property
    def dim(self):
        return self.dimension

    def __call__(self, t):
        out = np.zeros(self.dimension)
        arg = self.frequency * t + self.phase
        out[0] = self.radius * math.cos(arg)
        out[1] = self.radius * math.sin(arg)
        return out


# -- moving sets -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Piece:
    start: float
    end: float
    base: ProxSet
    path: MotionPath


class MovingSet:
    """Translation family ``C(t) = base_i + path_i(t)`` on pieces ``[a_i, b_i)``.

    The last piece is closed at the horizon.  Piece boundaries where the set
    actually changes are the jump times.
    """

    def __init__(self, pieces: Sequence[Piece], horizon: float | None = None):
        pieces = sorted(pieces, key=lambda p: p.start)
        if not pieces:
            raise ValueError("moving set needs at least one piece")
        horizon = float(pieces[-1].end if horizon is None else horizon)
        if pieces[0].start != 0.0:
            raise ValueError("pieces must start at t = 0")
        if not math.isclose(pieces[-1].end, horizon, rel_tol=0, abs_tol=1e-12):
            raise ValueError("pieces must end at the horizon")
        for left, right in zip(pieces, pieces[1:]):
            if left.end != right.start:
                raise ValueError(f"pieces do not partition [0, T]: gap/overlap at {left.end}")
        for p in pieces:
            if not p.end > p.start:
                raise ValueError("piece intervals must be nonempty")
            if p.base.dim != p.path.dim:
                raise ValueError("path dimension does not match the base set")
        dims = {p.base.dim for p in pieces}
        if len(dims) != 1:
            raise ValueError("all pieces must share one state dimension")
        self.pieces = tuple(pieces)
        self.horizon = horizon
        self.dim = dims.pop()
        self.rho = min(p.base.rho for p in pieces)
        self._starts = [p.start for p in pieces]
        self.jump_times = tuple(
            right.start for left, right in zip(pieces, pieces[1:]) if not _same_set_at(left, right, right.start)
        )

    @property
    def boundaries(self) -> tuple[float, ...]:
        return tuple(self._starts[1:])

    def piece_index(self, t: float) -> int:
        if not 0.0 <= t <= self.horizon:
            raise OutOfHorizon(f"t = {t} outside [0, {self.horizon}]")
        return bisect.bisect_right(self._starts, t) - 1

    def at(self, t: float) -> ProxSet:
        piece = self.pieces[self.piece_index(t)]
        return piece.base.translate(piece.path(t))

    def sets_over(self, s: float, t: float) -> list[ProxSet]:
        """Sets met on the cell ``(s, t]`` within the piece that contains ``t``.

        Translation motion is monotone enough on a grid cell that the two
        cell ends bracket the family; a cell that starts before a piece
        boundary only sees the new piece at ``t``.
        """
        k = self.piece_index(t)
        piece = self.pieces[k]
        out = [self.at(t)]
        if s < t and s >= piece.start:
            out.append(piece.base.translate(piece.path(s)))
        return out

    def hausdorff_bound(self, s: float, t: float) -> float:
        i, j = self.piece_index(s), self.piece_index(t)
        if i != j:
            raise CrossesJump(f"[{s}, {t}] straddles a piece boundary")
        path = self.pieces[i].path
        return float(np.linalg.norm(path(t) - path(s)))

    def jump_amplitude(self, t_jump: float, probe) -> float:
        if not any(math.isclose(t_jump, tj, rel_tol=0, abs_tol=1e-12) for tj in self.jump_times):
            raise ValueError(f"{t_jump} is not a declared jump time")
        return self.at(t_jump).distance(as_point(probe))

    def freeze(self, times: Sequence[float]) -> "FrozenMovingSet":
        return FrozenMovingSet(self, times)


class FrozenMovingSet:
    """Grid-discretized copy of a moving set: ``C(t_{k+1})`` held on ``(t_k, t_{k+1}]``.

    At grid times it agrees with the parent family, so a catching-up run on
    the same grid is an exact solution for it.  Declared jump times of the
    parent are always part of the grid.
    """

    def __init__(self, parent: MovingSet, times: Sequence[float]):
        ts = sorted(set(float(t) for t in times) | set(parent.boundaries) | {0.0, parent.horizon})
        if ts[0] != 0.0 or ts[-1] != parent.horizon:
            raise ValueError("freeze times must lie in [0, T]")
        self.parent = parent
        self.times = tuple(ts)
        self.horizon = parent.horizon
        self.dim = parent.dim
        self.rho = parent.rho
        self._sets = [parent.at(t) for t in ts]
        self.jump_times = tuple(ts[1:])
        self.boundaries = self.jump_times

    def _index(self, t: float) -> int:
        if not 0.0 <= t <= self.horizon:
            raise OutOfHorizon(f"t = {t} outside [0, {self.horizon}]")
        return bisect.bisect_left(self.times, t)

    def at(self, t: float) -> ProxSet:
        return self._sets[self._index(t)]

    def sets_over(self, s: float, t: float) -> list[ProxSet]:
        return [self.at(t)]

    def hausdorff_bound(self, s: float, t: float) -> float:
        if self._index(s) != self._index(t):
            raise CrossesJump(f"[{s}, {t}] straddles a freeze time")
        return 0.0


def _same_set_at(left: Piece, right: Piece, t: float) -> bool:
    if left.base is not right.base:
        return False
    return bool(np.array_equal(left.path(t), right.path(t)))


def at(C: MovingSet, t: float) -> ProxSet:
    return C.at(t)


def hausdorff_bound(C: MovingSet, s: float, t: float) -> float:
    return C.hausdorff_bound(s, t)


def jump_amplitude(C: MovingSet, t_jump: float, probe) -> float:
    return C.jump_amplitude(t_jump, probe)


def translated(base: ProxSet, path: MotionPath, horizon: float) -> MovingSet:
    """Single-piece family ``base + path(t)`` on ``[0, horizon]``."""
    return MovingSet([Piece(0.0, float(horizon), base, path)], horizon)
