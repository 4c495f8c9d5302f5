"""Built-in scenarios, convergence studies and the approximation-stability experiment."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from .dynamics import Circular, Constant, CrossesJump, MovingSet, Piece, PiecewiseLinear, Sinusoidal, translated
from .measure import BVTrajectory, TimeGrid, default_reference_measure, fmt, sup_distance, variation
from .residual import certify, integral_residual
from .solver import RefinementRow, SolveConfig, catching_up, evaluate


@dataclass
class Scenario:
    name: str
    C: MovingSet
    x0: np.ndarray
    reference: Callable[[float], np.ndarray] | None = None
    h0: float = 0.25
    notes: str = ""

    @property
    def horizon(self) -> float:
        return self.C.horizon

    def grid(self, h: float | None = None) -> TimeGrid:
        return TimeGrid.uniform(self.horizon, self.h0 if h is None else h, include=self.C.jump_times)


def _ramp() -> Scenario:
    C = translated(geo.Box([-1.0], [1.0]), PiecewiseLinear.from_knots([(0.0, [0.0]), (2.0, [2.0])]), 2.0)
    return Scenario(
        "RAMP",
        C,
        np.array([0.0]),
        reference=lambda t: np.array([max(0.0, t - 1.0)]),
        h0=0.25,
        notes=(
            "C(t) = [t - 1, t + 1]. Closed intervals are convex, so rho = inf. A Lipschitz "
            "translation is Hausdorff continuous, and bounded selections extend by projection."
        ),
    )


def _jump() -> Scenario:
    zero = Constant([0.0])
    C = MovingSet([Piece(0.0, 1.0, geo.Box([0.0], [1.0]), zero), Piece(1.0, 2.0, geo.Box([2.0], [3.0]), zero)], 2.0)
    return Scenario(
        "JUMP",
        C,
        np.array([0.0]),
        reference=lambda t: np.array([0.0 if t < 1.0 else 2.0]),
        h0=0.5,
        notes=(
            "Two frozen intervals with a jump at t = 1. Values are convex. Each piece is constant "
            "and the switch is right-continuous, so C is lower semicontinuous from the right only. "
            "The jump is a declared atom of the solution."
        ),
    )


def _sine(name: str, amplitude: float, reference=None) -> Scenario:
    C = translated(geo.Box([-1.0], [1.0]), Sinusoidal(amplitude, 1.0, 0.0, [1.0]), 2.0 * math.pi)
    return Scenario(
        name,
        C,
        np.array([0.0]),
        reference=reference,
        h0=2.0 * math.pi / 16.0,
        notes=(
            f"C(t) = [{amplitude:g} sin t - 1, {amplitude:g} sin t + 1]: a play operator with width 2. "
            "Convex values under a smooth translation."
        ),
    )


def _sine2_reference(t: float) -> np.ndarray:
    # play operator of width 1 driven by 2 sin t, started at 0
    if t <= math.pi / 6.0:
        x = 0.0
    elif t <= math.pi / 2.0:
        x = 2.0 * math.sin(t) - 1.0
    elif t <= math.pi:
        x = 1.0
    elif t <= 1.5 * math.pi:
        x = 2.0 * math.sin(t) + 1.0
    else:
        x = -1.0
    return np.array([x])


def _hole() -> Scenario:
    C = translated(
        geo.ComplementOfOpenBall([0.0, 0.0], 1.0),
        PiecewiseLinear.from_knots([(0.0, [0.0, 0.0]), (1.0, [1.0, 0.0])]),
        1.0,
    )
    return Scenario(
        "HOLE",
        C,
        np.array([1.0, 0.0]),
        reference=lambda t: np.array([1.0 + t, 0.0]),
        h0=0.25,
        notes=(
            "C(t) = R^2 minus the open unit ball centred at (t, 0). The complement of an open ball of "
            "radius 1 is 1-uniformly prox-regular, closed and connected in R^2. The translation has "
            "unit speed. Selections on bounded time intervals can be pushed radially off the hole "
            "while staying within a fixed ball."
        ),
    )


def _disk() -> Scenario:
    C = translated(geo.Ball([0.0, 0.0], 1.0), Circular(1.0), 2.0 * math.pi)
    return Scenario(
        "DISK",
        C,
        np.array([0.0, 0.0]),
        reference=None,
        h0=2.0 * math.pi / 32.0,
        notes=(
            "C(t) = closed unit disk centred at (cos t, sin t). Convex compact values under a "
            "smooth translation."
        ),
    )


def builtin_scenarios() -> list[Scenario]:
    return [
        _ramp(),
        _jump(),
        _sine("SINE-PLAY", 1.0, reference=lambda t: np.array([0.0])),
        _sine("SINE-PLAY-2", 2.0, reference=_sine2_reference),
        _hole(),
        _disk(),
    ]


def scenario(name: str) -> Scenario:
    for s in builtin_scenarios():
        if s.name == name.upper():
            return s
    raise KeyError(f"unknown scenario {name!r}; known: {[s.name for s in builtin_scenarios()]}")


# -- random admissible trajectories ------------------------------------------------


def random_admissible_trajectory(s: Scenario, grid: TimeGrid, rng: np.random.Generator) -> BVTrajectory:
    """A feasible-at-grid-times trajectory mixing catch-up steps, boundary hits and interior jumps."""
    x = s.x0.astype(float)
    values = [x.copy()]
    scale = max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    for t in grid.times[1:]:
        S = s.C.at(float(t))
        mode = rng.integers(4)
        if mode == 0:
            x = S.nearest(x)
        elif mode == 1 and S.distance(x) == 0.0:
            pass
        else:
            spread = 0.5 * scale if mode == 2 else 0.05 * scale
            x = S.nearest(x + spread * rng.standard_normal(x.size))
        values.append(x.copy())
    return BVTrajectory(grid, np.array(values))


# -- convergence ------------------------------------------------------------------


@dataclass
class Study:
    name: str
    columns: list[str]
    rows: list[list]
    checks: dict[str, bool] = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow(["" if v is None else (fmt(v) if isinstance(v, float) else v) for v in row])
        return buf.getvalue()

    def summary_json(self) -> str:
        payload = {"study": self.name, "ok": self.ok, "checks": self.checks, **self.info}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _decreasing_by(values, factor: float) -> bool:
    mags = [abs(v) for v in values]
    return all(b <= a / factor for a, b in zip(mags, mags[1:]))


def convergence_study(
    s: Scenario,
    levels: int,
    h0: float | None = None,
    *,
    refine: bool = True,
    factor: float = 1.5,
    gamma: float = geo.DEFAULT_GAMMA,
) -> Study:
    """Catching-up on successively halved grids; residual against the true ``C``."""
    if levels < 2:
        raise ValueError("a convergence study needs at least two levels")
    grid = s.grid(h0)
    rows: list[RefinementRow] = []
    for level in range(levels):
        x = catching_up(s.C, s.x0, SolveConfig(grid, gamma))
        rows.append(evaluate(s.C, x, level, s.reference))
        if refine:
            grid = grid.refined()
    checks = {"residual_decrease": _decreasing_by([r.residual for r in rows], factor)}
    if s.reference is not None:
        errs = [r.sup_error for r in rows]
        checks["sup_error_within_2h"] = all(e <= 2.0 * r.h_max + 1e-12 for e, r in zip(errs, rows))
        checks["sup_error_nonincreasing"] = all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
    ratios = [
        abs(a.residual) / abs(b.residual) if b.residual != 0.0 else None for a, b in zip(rows, rows[1:])
    ]
    return Study(
        name=f"converge:{s.name}",
        columns=["level", "h_max", "sup_error", "residual", "variation"],
        rows=[[r.level, r.h_max, r.sup_error, r.residual, r.variation] for r in rows],
        checks=checks,
        info={"scenario": s.name, "levels": levels, "factor": factor, "residual_ratios": ratios, "refine": refine},
    )


# -- stability under approximation of the moving set -------------------------------------


def stability_study(
    s: Scenario,
    n_max: int,
    *,
    n_min: int = 4,
    gamma: float = geo.DEFAULT_GAMMA,
    residual_tol: float | None = None,
    cauchy_tol: float | None = None,
    variation_bound: float | None = None,
    certificate_tol: float = 1e-7,
) -> Study:
    """Solve with time-frozen copies ``C_n`` of ``C`` on meshes ``T/n``, ``n = n_min, 2 n_min, ...``.

    Records ``E_n``, the residual of ``x_n`` against the true ``C``, the
    variation of ``x_n``, and ``sup |x_n - x_{2n}|``.
    """
    ns = []
    n = n_min
    while n <= n_max:
        ns.append(n)
        n *= 2
    if len(ns) < 2:
        raise ValueError("need at least two mesh levels")
    T = s.horizon
    trajs, residuals, variations = [], [], []
    for n in ns:
        mesh = TimeGrid.uniform(T, T / n, include=s.C.jump_times)
        C_n = s.C.freeze(mesh.times)
        x_n = catching_up(C_n, s.x0, SolveConfig(mesh, gamma))
        report = integral_residual(x_n, default_reference_measure(x_n), s.C)
        trajs.append(x_n)
        residuals.append(report.R)
        variations.append(variation(x_n))
    cauchy = [sup_distance(a, b) for a, b in zip(trajs, trajs[1:])] + [None]

    mags = [abs(e) for e in residuals]
    checks = {"residual_nonincreasing": all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(mags, mags[1:]))}
    if residual_tol is not None:
        checks["residual_final_within_tol"] = mags[-1] <= residual_tol
    steps = [c for c in cauchy if c is not None]
    checks["cauchy_nonincreasing"] = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(steps, steps[1:]))
    if cauchy_tol is not None:
        checks["cauchy_final_within_tol"] = steps[-1] <= cauchy_tol
    late = [v for n, v in zip(ns, variations) if n >= 8] or variations[-1:]
    checks["variation_bounded"] = max(late) <= late[0] * 1.05 + 1e-12
    if variation_bound is not None:
        checks["variation_within_bound"] = max(variations) <= variation_bound

    # outer semicontinuity surrogate: between grid times the frozen solution
    # may leave C(t) by at most the set motion over the cell
    final = trajs[-1]
    osc_ok = True
    for k in range(len(final.grid) - 1):
        a, b = float(final.times[k]), float(final.times[k + 1])
        for t in np.linspace(a, b, 5)[:-1]:
            try:
                bound = s.C.hausdorff_bound(a, float(t))
            except CrossesJump:
                continue
            if s.C.at(float(t)).distance(final.values[k]) > bound + 1e-9:
                osc_ok = False
    checks["osc_feasible_within_motion"] = osc_ok
    cert = certify(final, default_reference_measure(final), s.C, certificate_tol)
    checks["final_certified"] = cert.is_solution

    rows = [[n, T / n, e, v, c] for n, e, v, c in zip(ns, residuals, variations, cauchy)]
    return Study(
        name=f"stability:{s.name}",
        columns=["n", "mesh", "residual", "variation", "sup_dist_to_2n"],
        rows=rows,
        checks=checks,
        info={
            "scenario": s.name,
            "n_max": ns[-1],
            "final_residual": residuals[-1],
            "final_cauchy": steps[-1],
            "max_variation": max(variations),
        },
    )
