"""Moreau's catching-up scheme and residual-driven grid refinement."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import geometry as geo
from .dynamics import MovingSet
from .measure import BVTrajectory, TimeGrid, default_reference_measure, fmt, merge_times, variation
from .residual import integral_residual

log = logging.getLogger(__name__)


class SolverError(Exception):
    pass


class InfeasibleStart(SolverError):
    pass


class StepOutOfReach(SolverError):
    """``x_k`` is too far from ``C(t_{k+1})`` for a well-defined projection."""

    def __init__(self, k: int, t: float, dist: float, reach: float):
        super().__init__(
            f"step out of prox reach at step {k} (t = {t!r}): distance {dist:.6g} >= gamma*rho = {reach:.6g}"
        )
        self.k = k
        self.t = t
        self.dist = dist
        self.reach = reach


class BudgetExhausted(SolverError):
    def __init__(self, trajectory: BVTrajectory, history: list["RefinementRow"]):
        last = history[-1]
        super().__init__(f"refinement budget exhausted at level {last.level} with |R| = {abs(last.residual):.3e}")
        self.trajectory = trajectory
        self.history = history


@dataclass
class SolveConfig:
    grid: TimeGrid
    gamma: float = geo.DEFAULT_GAMMA
    projection_tol: float = 1e-10
    max_refinements: int = 12

    def __post_init__(self):
        geo.check_gamma(self.gamma)
        if not self.projection_tol > 0:
            raise ValueError("projection_tol must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be nonnegative")


def _check_grid(C: MovingSet, grid: TimeGrid) -> None:
    if abs(grid.horizon - C.horizon) > 1e-12:
        raise SolverError(f"grid ends at {grid.horizon}, moving set horizon is {C.horizon}")
    missing = [t for t in C.jump_times if not grid.contains(t)]
    if missing:
        raise SolverError(f"grid is missing jump times {missing}")


def catching_up(C: MovingSet, x0, cfg: SolveConfig) -> BVTrajectory:
    """``x_{k+1} = proj_{C(t_{k+1})}(x_k)`` on ``cfg.grid``."""
    _check_grid(C, cfg.grid)
    x = geo.as_point(x0)
    if x.size != C.dim:
        raise SolverError(f"x0 has dimension {x.size}, moving set has {C.dim}")
    d0 = C.at(0.0).distance(x)
    if d0 > cfg.projection_tol:
        raise InfeasibleStart(f"x0 is at distance {d0:.3e} from C(0)")
    times = cfg.grid.times
    values = np.empty((times.size, x.size))
    values[0] = x
    for k in range(times.size - 1):
        t = float(times[k + 1])
        S = C.at(t)
        try:
            x = geo.project(S, x, cfg.gamma)
        except geo.OutOfReach as exc:
            raise StepOutOfReach(k, t, exc.dist, exc.reach) from None
        values[k + 1] = x
    return BVTrajectory(cfg.grid, values)


def sup_error(x: BVTrajectory, reference: Callable[[float], np.ndarray], samples_per_cell: int = 8) -> float:
    """``sup_t |x(t) - reference(t)|`` sampled inside every cell and at its left limit."""
    worst = 0.0
    t = x.times
    for k in range(t.size - 1):
        h = t[k + 1] - t[k]
        pts = [t[k] + j * h / samples_per_cell for j in range(samples_per_cell)]
        pts.append(t[k + 1] - 1e-9 * h)
        for s in pts:
            worst = max(worst, float(np.linalg.norm(x.values[k] - reference(float(s)))))
    worst = max(worst, float(np.linalg.norm(x.values[-1] - reference(float(t[-1])))))
    return worst


@dataclass
class RefinementRow:
    level: int
    h_max: float
    residual: float
    variation: float
    sup_error: float | None = None


@dataclass
class RefinementLog:
    rows: list[RefinementRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "h_max", "residual", "variation", "sup_error_if_reference_known"])
        for r in self.rows:
            w.writerow([r.level, fmt(r.h_max), fmt(r.residual), fmt(r.variation), "" if r.sup_error is None else fmt(r.sup_error)])
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def evaluate(C: MovingSet, x: BVTrajectory, level: int, reference=None) -> RefinementRow:
    nu = default_reference_measure(x)
    report = integral_residual(x, nu, C)
    err = None if reference is None else sup_error(x, reference)
    return RefinementRow(level, x.grid.h_max, report.R, variation(x), err)


def refine_until(
    C: MovingSet,
    x0,
    cfg: SolveConfig,
    target_residual: float,
    reference: Callable[[float], np.ndarray] | None = None,
) -> tuple[BVTrajectory, RefinementLog]:
    """Halve the grid until ``|R| <= target_residual`` against ``C``.

    Raises :class:`BudgetExhausted` after ``cfg.max_refinements`` halvings.
    """
    if not target_residual > 0:
        raise ValueError("target_residual must be positive")
    grid = TimeGrid(np.asarray(merge_times(cfg.grid.times, C.jump_times)))
    history = RefinementLog()
    for level in range(cfg.max_refinements + 1):
        run_cfg = SolveConfig(grid, cfg.gamma, cfg.projection_tol, cfg.max_refinements)
        x = catching_up(C, x0, run_cfg)
        row = evaluate(C, x, level, reference)
        history.rows.append(row)
        log.debug("level %d h=%.3g R=%.3e", level, row.h_max, row.residual)
        if abs(row.residual) <= target_residual:
            return x, history
        if level < cfg.max_refinements:
            grid = grid.refined()
    exc = BudgetExhausted(x, history.rows)
    exc.log = history
    raise exc
