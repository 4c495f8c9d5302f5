"""Grid-based BV trajectories, their differential measures, and reference measures.

Trajectories are right-continuous and piecewise constant,
``x(t) = x_k`` on ``[t_k, t_{k+1})``, so ``dx`` is purely atomic with atoms
``x_k - x_{k-1}`` at ``t_k``.  A reference measure is a finite list of atoms
plus a uniform Lebesgue density.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class MeasureError(Exception):
    pass


class DegenerateMeasure(MeasureError):
    pass


class NotAbsolutelyContinuous(MeasureError):
    def __init__(self, t: float):
        super().__init__(f"dx has an atom at t = {t!r} that is not a nu-atom")
        self.t = t


# -- time grids ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("a time grid needs at least two points")
        if times[0] != 0.0:
            raise ValueError("a time grid starts at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "times", times)

    @classmethod
    def uniform(cls, horizon: float, h: float, include: Sequence[float] = ()) -> "TimeGrid":
        n = max(1, int(math.ceil(horizon / h - 1e-9)))
        times = np.linspace(0.0, horizon, n + 1)
        return cls(np.asarray(merge_times(times, include)))

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def h_max(self) -> float:
        return float(np.max(np.diff(self.times)))

    def __len__(self):
        return self.times.size

    def refined(self) -> "TimeGrid":
        """Insert the midpoint of every interval."""
        t = self.times
        mids = 0.5 * (t[:-1] + t[1:])
        out = np.empty(2 * t.size - 1)
        out[0::2] = t
        out[1::2] = mids
        return TimeGrid(out)

    def contains(self, t: float, tol: float = 1e-12) -> bool:
        j = int(np.searchsorted(self.times, t))
        return any(0 <= i < self.times.size and abs(self.times[i] - t) <= tol for i in (j - 1, j))


def merge_times(times, extra, tol: float = 1e-12) -> list[float]:
    out = sorted(float(t) for t in times)
    for t in extra:
        t = float(t)
        if not any(abs(t - s) <= tol for s in out):
            out.append(t)
    return sorted(out)


# -- trajectories -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BVTrajectory:
    grid: TimeGrid
    values: np.ndarray  # shape (N + 1, d)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != len(self.grid):
            raise ValueError("one value per grid time is required")
        if not np.all(np.isfinite(vals)):
            raise ValueError("trajectory values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_arrays(cls, times, values) -> "BVTrajectory":
        return cls(TimeGrid(np.asarray(times, dtype=float)), np.asarray(values, dtype=float))

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def horizon(self) -> float:
        return self.grid.horizon

    def __call__(self, t: float) -> np.ndarray:
        """Right-continuous evaluation."""
        if not 0.0 <= t <= self.horizon:
            raise ValueError(f"t = {t} outside [0, {self.horizon}]")
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.values[k].copy()

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def sample(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        idx = np.searchsorted(self.times, ts, side="right") - 1
        return self.values[np.clip(idx, 0, len(self.grid) - 1)]


def _length(vec) -> float:
    # hypot avoids the under/overflow of squaring tiny or huge increments
    return math.hypot(*(float(c) for c in vec))


def variation(x: BVTrajectory) -> float:
    return math.fsum(_length(d) for d in x.increments())


def differential_measure(x: BVTrajectory) -> list[tuple[float, np.ndarray]]:
    """Atoms ``(t_k, x_k - x_{k-1})`` of ``dx``; zero increments are omitted."""
    inc = x.increments()
    return [(float(x.times[k + 1]), inc[k].copy()) for k in range(inc.shape[0]) if np.any(inc[k])]


def sup_distance(x: BVTrajectory, y: BVTrajectory) -> float:
    """``sup_t |x(t) - y(t)|`` for two piecewise-constant trajectories on [0, T]."""
    ts = np.array(merge_times(x.times, y.times))
    return float(np.max(np.linalg.norm(x.sample(ts) - y.sample(ts), axis=1)))


def concatenate(x: BVTrajectory, y: BVTrajectory) -> BVTrajectory:
    """``x`` followed by ``y`` shifted in time to start at ``x``'s horizon."""
    times = np.concatenate([x.times, x.horizon + y.times[1:]])
    values = np.vstack([x.values, y.values[1:]])
    # the junction step from x(T) to y(0) counts as an atom
    return BVTrajectory.from_arrays(times, values)


# -- reference measures -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceMeasure:
    """``nu = sum_k m_k delta_{t_k} + lebesgue_weight * dt`` on ``[0, horizon]``."""

    atom_times: np.ndarray
    atom_masses: np.ndarray
    lebesgue_weight: float = 0.0
    horizon: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.atom_times, dtype=float).reshape(-1)
        m = np.asarray(self.atom_masses, dtype=float).reshape(-1)
        if t.size != m.size:
            raise ValueError("atom times and masses must match")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("atom masses must be positive and finite")
        if self.lebesgue_weight < 0:
            raise ValueError("lebesgue weight must be nonnegative")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("atom times must be strictly increasing")
        object.__setattr__(self, "atom_times", t)
        object.__setattr__(self, "atom_masses", m)
        object.__setattr__(self, "lebesgue_weight", float(self.lebesgue_weight))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.atom_masses)) + self.lebesgue_weight * self.horizon

    def mass_at(self, t: float, tol: float = 1e-12) -> float:
        j = int(np.searchsorted(self.atom_times, t))
        for i in (j - 1, j):
            if 0 <= i < self.atom_times.size and abs(self.atom_times[i] - t) <= tol:
                return float(self.atom_masses[i])
        return 0.0


def canonical_reference_measure(x: BVTrajectory, lebesgue_weight: float = 0.0) -> ReferenceMeasure:
    """``nu = |dx| + lebesgue_weight * dt``."""
    if lebesgue_weight < 0:
        raise ValueError("lebesgue weight must be nonnegative")
    atoms = differential_measure(x)
    if not atoms and lebesgue_weight == 0.0:
        raise DegenerateMeasure("|dx| is zero and no Lebesgue part was requested")
    times = np.array([t for t, _ in atoms])
    masses = np.array([_length(d) for _, d in atoms])
    return ReferenceMeasure(times, masses, lebesgue_weight, x.horizon)


def default_reference_measure(x: BVTrajectory) -> ReferenceMeasure:
    """``|dx|``, or plain Lebesgue measure when ``x`` is constant."""
    if variation(x) == 0.0:
        return canonical_reference_measure(x, 1.0)
    return canonical_reference_measure(x, 0.0)


@dataclass(frozen=True, eq=False)
class Density:
    """``v = dx/dnu``: one vector per grid time.

    ``at_atoms[k]`` is ``v(t_k)`` where ``nu`` has an atom (zero elsewhere,
    including the Lebesgue part, since ``x`` is piecewise constant).
    """

    times: np.ndarray
    vectors: np.ndarray
    masses: np.ndarray  # nu-atom mass at each grid time (0 if none)

    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def integral_norm(self) -> float:
        """``int |v| dnu``."""
        return float(np.sum(self.norm() * self.masses))


def density(x: BVTrajectory, nu: ReferenceMeasure) -> Density:
    times = x.times
    vectors = np.zeros_like(x.values)
    masses = np.array([nu.mass_at(float(t)) for t in times])
    inc = x.increments()
    for k in range(inc.shape[0]):
        if not np.any(inc[k]):
            continue
        m = masses[k + 1]
        if m <= 0.0:
            raise NotAbsolutelyContinuous(float(times[k + 1]))
        vectors[k + 1] = inc[k] / m
    return Density(times.copy(), vectors, masses)


def reconstruct(x0, d: Density) -> np.ndarray:
    """``x(t_k) = x(0) + sum_{j <= k} v(t_j) m_j``."""
    steps = d.vectors * d.masses[:, None]
    steps[0] = 0.0
    return np.asarray(x0, dtype=float)[None, :] + np.cumsum(steps, axis=0)


# -- trajectory CSV -----------------------------------------------------------------

CSV_COMMENT = "# right-continuous piecewise-constant trajectory: x(t) = x_k for t in [t_k, t_{k+1})"


def fmt(v: float) -> str:
    return repr(float(v))


def trajectory_to_csv(x: BVTrajectory) -> str:
    buf = io.StringIO()
    buf.write(CSV_COMMENT + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(x.dim)])
    for t, row in zip(x.times, x.values):
        w.writerow([fmt(t)] + [fmt(v) for v in row])
    return buf.getvalue()


def write_trajectory_csv(x: BVTrajectory, path: str | Path) -> None:
    Path(path).write_text(trajectory_to_csv(x), encoding="utf-8")


def read_trajectory_csv(path: str | Path) -> BVTrajectory:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip() and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or rows[0][0].strip() != "t":
        raise ValueError(f"{path}: expected a header row starting with 't'")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: no trajectory rows")
    return BVTrajectory.from_arrays(data[:, 0], data[:, 1:])
