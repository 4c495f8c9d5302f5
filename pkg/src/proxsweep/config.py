"""Scenario config files.

A config is an INI document: one ``[scenario]`` section and either a
``family`` key naming a built-in scenario or one ``[piece ...]`` section per
piece of the moving set::

    [scenario]
    dimension = 1
    horizon = 2
    x0 = 0
    grid_h = 0.5

    [piece 1]
    start = 0
    end = 2
    set = box
    lower = -1
    upper = 1
    motion = linear
    knots = 0: 0; 2: 2

Vectors are comma-separated decimals.  Unknown keys are rejected.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry as geo
from .dynamics import Circular, Constant, MotionPath, MovingSet, Piece, PiecewiseLinear, Sinusoidal
from .lab import Scenario, scenario
from .measure import TimeGrid, merge_times
from .solver import SolveConfig


class ConfigError(Exception):
    pass


SCENARIO_KEYS = {
    "dimension", "horizon", "x0", "grid_h", "grid_times", "gamma", "projection_tol", "max_refinements",
    "target_residual", "certificate_tol", "feasibility_tol", "family", "levels", "nmax", "n_min", "refine",
    "factor", "residual_tol", "cauchy_tol", "variation_bound", "seed", "samples",
}  # fmt: skip

SET_KEYS = {
    "halfspace": {"normal", "offset"},
    "ball": {"center", "radius"},
    "box": {"lower", "upper"},
    "complement_ball": {"center", "radius"},
}
MOTION_KEYS = {
    "constant": {"shift"},
    "linear": {"knots"},
    "sine": {"amplitude", "frequency", "phase", "direction"},
    "circle": {"radius_path", "frequency", "phase"},
}
PIECE_COMMON = {"start", "end", "set", "motion", "clip_center", "clip_radius"}


@dataclass
class ScenarioConfig:
    scenario: Scenario
    solve: SolveConfig
    options: dict = field(default_factory=dict)
    family: str | None = None

    @property
    def C(self) -> MovingSet:
        return self.scenario.C

    def get(self, key, default=None):
        return self.options.get(key, default)


def _vec(text: str, key: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def _num(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in {"1", "true", "yes", "on"}:
        return True
    if low in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _require(sec, key, where):
    if key not in sec:
        raise ConfigError(f"[{where}] is missing required key {key!r}")
    return sec[key]


def _build_set(sec, where: str, dim: int) -> geo.ProxSet:
    kind = _require(sec, "set", where).strip().lower()
    if kind not in SET_KEYS:
        raise ConfigError(f"[{where}] unknown set kind {kind!r}")
    g = lambda k: _require(sec, k, where)  # noqa: E731
    try:
        if kind == "halfspace":
            S = geo.Halfspace(_vec(g("normal"), "normal"), _num(g("offset"), "offset"))
        elif kind == "ball":
            S = geo.Ball(_vec(g("center"), "center"), _num(g("radius"), "radius"))
        elif kind == "box":
            S = geo.Box(_vec(g("lower"), "lower"), _vec(g("upper"), "upper"))
        else:
            S = geo.ComplementOfOpenBall(_vec(g("center"), "center"), _num(g("radius"), "radius"))
        if "clip_center" in sec or "clip_radius" in sec:
            S = geo.IntersectBall(
                S, _vec(g("clip_center"), "clip_center"), _num(g("clip_radius"), "clip_radius")
            )
    except ValueError as exc:
        raise ConfigError(f"[{where}] {exc}") from None
    if S.dim != dim:
        raise ConfigError(f"[{where}] set has dimension {S.dim}, scenario dimension is {dim}")
    return S


def _build_motion(sec, where: str, dim: int) -> MotionPath:
    kind = sec.get("motion", "constant").strip().lower()
    if kind not in MOTION_KEYS:
        raise ConfigError(f"[{where}] unknown motion {kind!r}")
    try:
        if kind == "constant":
            shift = _vec(sec["shift"], "shift") if "shift" in sec else np.zeros(dim)
            path = Constant(shift)
        elif kind == "linear":
            knots = []
            for item in _require(sec, "knots", where).split(";"):
                if not item.strip():
                    continue
                t, _, vec = item.partition(":")
                knots.append((_num(t, "knots"), _vec(vec, "knots")))
            path = PiecewiseLinear.from_knots(knots)
        elif kind == "sine":
            path = Sinusoidal(
                _num(_require(sec, "amplitude", where), "amplitude"),
                _num(sec.get("frequency", "1"), "frequency"),
                _num(sec.get("phase", "0"), "phase"),
                _vec(_require(sec, "direction", where), "direction"),
            )
        else:
            path = Circular(
                _num(_require(sec, "radius_path", where), "radius_path"),
                _num(sec.get("frequency", "1"), "frequency"),
                _num(sec.get("phase", "0"), "phase"),
                dim,
            )
    except ValueError as exc:
        raise ConfigError(f"[{where}] {exc}") from None
    if path.dim != dim:
        raise ConfigError(f"[{where}] motion has dimension {path.dim}, scenario dimension is {dim}")
    return path


def _check_keys(sec, allowed, where):
    unknown = sorted(set(sec.keys()) - set(allowed))
    if unknown:
        raise ConfigError(f"[{where}] unknown keys: {', '.join(unknown)}")


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"), default_section="__none__")
    # keys stay case-sensitive
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if "scenario" not in cp:
        raise ConfigError("missing [scenario] section")
    sc = cp["scenario"]
    _check_keys(sc, SCENARIO_KEYS, "scenario")
    piece_secs = [name for name in cp.sections() if name.startswith("piece")]
    others = [name for name in cp.sections() if name != "scenario" and name not in piece_secs]
    if others:
        raise ConfigError(f"unknown sections: {', '.join(others)}")

    family = sc.get("family")
    if family is not None:
        if piece_secs:
            raise ConfigError("give either 'family' or [piece ...] sections, not both")
        try:
            base = scenario(family.strip())
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        s = Scenario(base.name, base.C, base.x0.copy(), base.reference, base.h0, base.notes)
        if "x0" in sc:
            s.x0 = _vec(sc["x0"], "x0")
    else:
        dim = _int(_require(sc, "dimension", "scenario"), "dimension")
        if dim < 1:
            raise ConfigError("dimension must be >= 1")
        horizon = _num(_require(sc, "horizon", "scenario"), "horizon")
        if not horizon > 0:
            raise ConfigError("horizon must be positive")
        x0 = _vec(_require(sc, "x0", "scenario"), "x0")
        if x0.size != dim:
            raise ConfigError(f"x0 has {x0.size} entries, dimension is {dim}")
        if not piece_secs:
            raise ConfigError("no [piece ...] sections")
        pieces = []
        for name in piece_secs:
            sec = cp[name]
            kind = _require(sec, "set", name).strip().lower()
            if kind not in SET_KEYS:
                raise ConfigError(f"[{name}] unknown set kind {kind!r}")
            motion = sec.get("motion", "constant").strip().lower()
            if motion not in MOTION_KEYS:
                raise ConfigError(f"[{name}] unknown motion {motion!r}")
            allowed = PIECE_COMMON | SET_KEYS.get(kind, set()) | MOTION_KEYS.get(motion, set())
            _check_keys(sec, allowed, name)
            start = _num(_require(sec, "start", name), "start")
            end = _num(_require(sec, "end", name), "end")
            if not (0.0 <= start < end <= horizon):
                raise ConfigError(f"[{name}] interval [{start}, {end}) is not inside [0, {horizon}]")
            pieces.append(Piece(start, end, _build_set(sec, name, dim), _build_motion(sec, name, dim)))
        try:
            C = MovingSet(pieces, horizon)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        s = Scenario(Path(source).stem, C, x0, None, horizon)

    if "grid_times" in sc:
        times = merge_times(_vec(sc["grid_times"], "grid_times"), s.C.jump_times)
        try:
            grid = TimeGrid(np.array(times))
        except ValueError as exc:
            raise ConfigError(f"grid_times: {exc}") from None
        if abs(grid.horizon - s.horizon) > 1e-12:
            raise ConfigError("grid_times must end at the horizon")
    else:
        h = _num(sc["grid_h"], "grid_h") if "grid_h" in sc else s.h0
        if not h > 0:
            raise ConfigError("grid_h must be positive")
        s.h0 = h
        grid = s.grid(h)

    options = {}
    floats = ["target_residual", "certificate_tol", "feasibility_tol", "factor", "residual_tol", "cauchy_tol", "variation_bound"]
    ints = ["levels", "nmax", "n_min", "seed", "samples"]
    for key in floats:
        if key in sc:
            options[key] = _num(sc[key], key)
    for key in ints:
        if key in sc:
            options[key] = _int(sc[key], key)
    if "refine" in sc:
        options["refine"] = _bool(sc["refine"], "refine")
    try:
        solve = SolveConfig(
            grid,
            gamma=_num(sc.get("gamma", "0.9"), "gamma"),
            projection_tol=_num(sc.get("projection_tol", "1e-10"), "projection_tol"),
            max_refinements=_int(sc.get("max_refinements", "12"), "max_refinements"),
        )
    except ValueError as exc:
        raise ConfigError(f"[scenario] gamma/projection_tol/max_refinements: {exc}") from None
    if s.x0.size != s.C.dim:
        raise ConfigError(f"x0 has {s.x0.size} entries, dimension is {s.C.dim}")
    return ScenarioConfig(s, solve, options, family)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, str(path))
