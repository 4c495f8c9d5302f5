"""Variational residual of a BV trajectory against a moving prox-regular set.

For a density ``v = dx/dnu`` the integrand of the residual is

    f_x(t, y) = <v, y - x> + |v| / (2 rho) * |y - x|^2,   y in C(t),

and its pointwise infimum has the closed form

    m(t) = |v| / (2 rho) * (d(C(t); x - rho w)^2 - rho^2),   w = v / |v|,

with ``m = inf_{y in C(t)} <v, y - x>`` when ``rho`` is infinite.  For an
admissible ``x``, ``-rho |v| / 2 <= m <= 0`` and ``m = 0`` exactly when
``-v`` is a proximal normal to ``C(t)`` at ``x``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import geometry as geo
from .dynamics import MovingSet
from .measure import BVTrajectory, ReferenceMeasure, density, fmt, variation

DEFAULT_CERTIFICATE_TOL = 1e-7


class ResidualError(Exception):
    pass


class InfeasibleTrajectory(ResidualError):
    def __init__(self, t: float, dist: float):
        super().__init__(f"trajectory leaves the moving set at t = {t!r} (distance {dist:.3e})")
        self.t = t
        self.dist = dist


class InfeasibleTest(ResidualError):
    def __init__(self, t: float, dist: float):
        super().__init__(f"test trajectory is infeasible at t = {t!r} (distance {dist:.3e})")
        self.t = t
        self.dist = dist


class CrossCheckMismatch(ResidualError):
    """The residual test and the normal-cone test disagree on an atom."""

    def __init__(self, t: float, m: float, deviation: float, tol: float):
        super().__init__(
            f"at t = {t!r}: residual m = {m:.3e} and normal-cone deviation {deviation:.3e} disagree (tol {tol:.1e})"
        )
        self.t = t
        self.m = m
        self.deviation = deviation


def _infimum(S: geo.ProxSet, x: np.ndarray, v: np.ndarray, rho: float) -> float:
    """``inf_{y in S} f_x(y)`` with no feasibility requirement on ``x``."""
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return 0.0
    if math.isinf(rho):
        if not S.is_convex:
            raise ValueError("rho = inf requires a convex set")
        return S.linear_min(v) - float(v @ x)
    a = x - (rho / nv) * v
    d = S.distance(a)
    return nv / (2.0 * rho) * (d - rho) * (d + rho)


def pointwise_residual(S: geo.ProxSet, x, v, rho: float, tol: float = geo.DEFAULT_TOL) -> float:
    """``m = inf_{y in S} [<v, y - x> + |v|/(2 rho) |y - x|^2]`` for feasible ``x``.

    Returns ``-inf`` when ``rho`` is infinite and the linear infimum is
    unbounded (possible only on unbounded convex sets).
    """
    x, v = geo.as_point(x), geo.as_point(v)
    d = S.distance(x)
    if d > tol:
        raise geo.InfeasiblePoint(d, tol)
    # y = x is admissible, so the infimum is at most 0
    return min(_infimum(S, x, v, rho), 0.0)


def integrand(x, y, v, rho: float) -> float:
    x, y, v = (geo.as_point(a) for a in (x, y, v))
    quad = 0.0 if math.isinf(rho) else float(np.linalg.norm(v)) / (2.0 * rho) * float((y - x) @ (y - x))
    return float(v @ (y - x)) + quad


# -- reports --------------------------------------------------------------------


@dataclass
class ResidualReport:
    """Per-atom residual profile plus the integrated value ``R``.

    ``m`` is the worst pointwise residual over the sets met on the atom's
    grid cell (the value that enters ``R``); ``m_atom`` uses only the set at
    the atom time, which is the differential-measure characterization.
    """

    times: np.ndarray
    masses: np.ndarray
    norm_v: np.ndarray
    m: np.ndarray
    m_atom: np.ndarray
    R: float
    lower_bound: float
    rho: float
    certificate_tol: float
    feasibility_tol: float
    lebesgue_weight: float = 0.0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.m * self.masses)

    @property
    def worst(self) -> tuple[float | None, float]:
        if self.m_atom.size == 0:
            return None, 0.0
        k = int(np.argmin(self.m_atom))
        return float(self.times[k]), float(self.m_atom[k])

    @property
    def verdict(self) -> str:
        if self.m_atom.size == 0 or float(np.min(self.m_atom)) >= -self.certificate_tol:
            return "Solution"
        return "NotSolution"

    @property
    def regime(self) -> str:
        if self.lebesgue_weight > 0.0:
            return "pointwise (differential-measure) certificate"
        return "atomic"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mass", "norm_v", "m", "cumulative_R"])
        for row in zip(self.times, self.masses, self.norm_v, self.m, self.cumulative):
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def _check_admissible(x: BVTrajectory, C: MovingSet, tol: float) -> None:
    for t, xk in zip(x.times, x.values):
        d = C.at(float(t)).distance(xk)
        if d > tol:
            raise InfeasibleTrajectory(float(t), d)


def integral_residual(
    x: BVTrajectory,
    nu: ReferenceMeasure,
    C: MovingSet,
    *,
    certificate_tol: float = DEFAULT_CERTIFICATE_TOL,
    feasibility_tol: float = geo.DEFAULT_TOL,
) -> ResidualReport:
    """``R = int m dnu`` for a piecewise-constant ``x`` against the family ``C``.

    Each atom at ``t_k`` is tested against every set the family passes
    through on ``(t_{k-1}, t_k]`` (see :meth:`MovingSet.sets_over`), so a
    trajectory that is exact only for a time-frozen copy of ``C`` picks up a
    residual of the order of the set motion per cell.  For a piecewise-
    constant ``C`` only ``C(t_k)`` is used.  On the Lebesgue part ``v = 0``
    and the integrand vanishes.
    """
    _check_admissible(x, C, feasibility_tol)
    dens = density(x, nu)
    rho = C.rho
    times, masses, norms, ms, m_atoms = [], [], [], [], []
    diagnostics = []
    for k in range(1, len(x.grid)):
        v = dens.vectors[k]
        if not np.any(v):
            continue
        t, s = float(x.times[k]), float(x.times[k - 1])
        xk = x.values[k]
        sets = C.sets_over(s, t)
        m_atom = min(_infimum(sets[0], xk, v, rho), 0.0)
        m = m_atom
        for S in sets[1:]:
            m = min(m, _infimum(S, xk, v, rho))
        if math.isinf(m):
            diagnostics.append(f"unbounded linear infimum at t = {t!r}")
        times.append(t)
        masses.append(dens.masses[k])
        norms.append(float(np.linalg.norm(v)))
        ms.append(m)
        m_atoms.append(m_atom)
    masses_a = np.array(masses)
    m_a = np.array(ms)
    R = float(np.sum(m_a * masses_a)) if m_a.size else 0.0
    int_v = float(np.dot(norms, masses)) if norms else 0.0
    if int_v == 0.0:
        lower = 0.0
    elif math.isinf(rho):
        lower = -math.inf
    else:
        lower = -0.5 * rho * int_v
    return ResidualReport(
        times=np.array(times),
        masses=masses_a,
        norm_v=np.array(norms),
        m=m_a,
        m_atom=np.array(m_atoms),
        R=R,
        lower_bound=lower,
        rho=rho,
        certificate_tol=certificate_tol * (1.0 + variation(x)),
        feasibility_tol=feasibility_tol,
        lebesgue_weight=nu.lebesgue_weight,
        diagnostics=diagnostics,
    )


def check_integral_inequality(
    x: BVTrajectory,
    y_test: BVTrajectory | Callable[[float], np.ndarray],
    nu: ReferenceMeasure,
    C: MovingSet,
    feasibility_tol: float = geo.DEFAULT_TOL,
) -> float:
    """``L(y) = int [<v, y - x> + |v|/(2 rho) |y - x|^2] dnu`` for a feasible test ``y``.

    Only the atoms of ``nu`` carry a nonzero integrand; ``y`` must lie in
    ``C(t_k)`` there.
    """
    dens = density(x, nu)
    rho = C.rho
    total = 0.0
    for k in range(1, len(x.grid)):
        v = dens.vectors[k]
        if not np.any(v):
            continue
        t = float(x.times[k])
        y = geo.as_point(y_test(t))
        d = C.at(t).distance(y)
        if d > feasibility_tol:
            raise InfeasibleTest(t, d)
        total += integrand(x.values[k], y, v, rho) * dens.masses[k]
    return total


def atom_lower_bound(report: ResidualReport) -> float:
    """``sum_k m(t_k) m_k`` with the atom-time residual; a lower bound for every ``L(y)``."""
    if report.m_atom.size == 0:
        return 0.0
    return float(np.sum(report.m_atom * report.masses))


# -- certificates -------------------------------------------------------------------


@dataclass
class Certificate:
    verdict: str
    R: float
    lower_bound: float
    worst_time: float | None
    worst_m: float
    certificate_tol: float
    feasibility_tol: float
    gamma: float
    atoms_checked: int
    regime: str = "atomic"

    @property
    def is_solution(self) -> bool:
        return self.verdict == "Solution"

    def to_json(self) -> str:
        record = {
            "verdict": self.verdict,
            "R": self.R,
            "lower_bound": self.lower_bound if math.isfinite(self.lower_bound) else "-inf",
            "worst_time": self.worst_time,
            "worst_m": self.worst_m if math.isfinite(self.worst_m) else "-inf",
            "atoms_checked": self.atoms_checked,
            "regime": self.regime,
            "tolerances": {
                "certificate_tol": self.certificate_tol,
                "feasibility_tol": self.feasibility_tol,
                "gamma": self.gamma,
            },
        }
        return json.dumps(record, indent=2, sort_keys=True) + "\n"


def deviation_bound(dev: float, norm_v: float, rho: float, gamma: float = geo.DEFAULT_GAMMA) -> float:
    """Upper bound on ``m`` implied by a normal-cone deviation ``dev``.

    With ``y = proj(x + s*zeta)`` and ``|y - x| = dev``, the projection
    inequality gives ``<zeta, y - x> >= dev^2 / (2 s)``, so ``f_x(y)`` is at most
    ``-|v| dev^2 (1 - gamma) / (2 gamma rho)`` (``-|v| dev^2 / 2`` when convex,
    where ``s = 1``).  This puts the deviation on the residual's scale.
    """
    if math.isinf(rho):
        return -0.5 * norm_v * dev * dev
    return -norm_v * dev * dev * (1.0 - gamma) / (2.0 * gamma * rho)


def checks_disagree(m: float, dev: float, norm_v: float, rho: float, gamma: float, tol: float) -> bool:
    """Whether the residual test and the normal-cone test conflict beyond tolerance.

    ``m`` is quadratic in the angle between ``-v`` and the nearest normal on
    curved boundaries but linear on flat faces, while ``dev`` is always
    linear, so near the threshold one test may pass and the other fail.  A
    conflict is reported only when one value rules the other out: a passing
    residual caps ``dev`` through :func:`deviation_bound`, and a passing
    deviation keeps ``m`` above ``-sqrt(tol) (1 + |v|)``.
    """
    if m >= -tol and deviation_bound(dev, norm_v, rho, gamma) < -tol:
        return True
    return dev <= tol and m < -math.sqrt(tol) * (1.0 + norm_v)


def certify(
    x: BVTrajectory,
    nu: ReferenceMeasure,
    C: MovingSet,
    certificate_tol: float = DEFAULT_CERTIFICATE_TOL,
    *,
    gamma: float = geo.DEFAULT_GAMMA,
    feasibility_tol: float = geo.DEFAULT_TOL,
) -> Certificate:
    """Decide whether ``x`` solves the sweeping process for ``C``.

    Two independent atom-wise tests are run: ``m(t_k) >= -tol`` and the
    projection test of :func:`geometry.normal_deviation` for ``-v(t_k)``.
    They are equivalent in exact arithmetic; a conflict beyond tolerance
    (see :func:`checks_disagree`) raises :class:`CrossCheckMismatch`.
    """
    report = integral_residual(x, nu, C, certificate_tol=certificate_tol, feasibility_tol=feasibility_tol)
    tol = report.certificate_tol
    dens = density(x, nu)
    idx = {float(t): k for k, t in enumerate(x.times)}
    for t, m in zip(report.times, report.m_atom):
        k = idx[float(t)]
        S = C.at(float(t))
        v = dens.vectors[k]
        nv = float(np.linalg.norm(v))
        dev = geo.normal_deviation(S, x.values[k], -v / nv, gamma)
        if checks_disagree(float(m), dev, nv, C.rho, gamma, tol):
            raise CrossCheckMismatch(float(t), float(m), dev, tol)
    worst_time, worst_m = report.worst
    return Certificate(
        verdict=report.verdict,
        R=report.R,
        lower_bound=report.lower_bound,
        worst_time=worst_time if report.verdict != "Solution" else None,
        worst_m=worst_m,
        certificate_tol=tol,
        feasibility_tol=feasibility_tol,
        gamma=gamma,
        atoms_checked=int(report.times.size),
        regime=report.regime,
    )


def write_residual_csv(report: ResidualReport, path: str | Path) -> None:
    Path(path).write_text(report.to_csv(), encoding="utf-8")
