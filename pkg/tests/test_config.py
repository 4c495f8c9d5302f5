from pathlib import Path

import numpy as np
import pytest

from proxsweep import geometry as geo
from proxsweep.config import ConfigError, load_config, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

BASE = """
[scenario]
dimension = 2
horizon = 1
x0 = 2, 0
grid_h = 0.25

[piece 1]
start = 0
end = 1
set = complement_ball
center = 0, 0
radius = 1
"""


def test_shipped_configs_parse():
    for path in CONFIGS.glob("*.ini"):
        if path.stem == "missing_x0":
            with pytest.raises(ConfigError):
                load_config(path)
        else:
            load_config(path)


def test_ramp_config():
    cfg = load_config(CONFIGS / "ramp.ini")
    assert cfg.C.horizon == 2.0 and cfg.solve.grid.times.tolist() == [0, 0.5, 1, 1.5, 2]
    assert cfg.C.at(1.0).distance(np.array([2.0])) == 0.0


def test_family_config():
    cfg = load_config(CONFIGS / "sine_stability.ini")
    assert cfg.family == "SINE-PLAY" and cfg.get("nmax") == 256 and cfg.get("residual_tol") == 1e-2


def test_clip_keys_build_intersect_ball():
    cfg = parse_config(BASE + "clip_center = 1.3, 0\nclip_radius = 0.5\n")
    S = cfg.C.at(0.0)
    assert isinstance(S, geo.IntersectBall) and S.rho == 1.0
    assert S.distance(np.array([1.5, 0.0])) == 0.0 and S.distance(np.array([2.0, 0.0])) == pytest.approx(0.2)


@pytest.mark.parametrize(
    "edit, message",
    [
        (lambda t: t.replace("x0 = 2, 0\n", ""), "x0"),
        (lambda t: t + "bogus = 1\n", "unknown keys"),
        (lambda t: t.replace("radius = 1", "radius = -1"), "radius"),
        (lambda t: t.replace("x0 = 2, 0", "x0 = 2"), "x0"),
        (lambda t: t.replace("end = 1", "end = 3"), "inside"),
        (lambda t: t + "\n[extra]\na = 1\n", "unknown sections"),
        (lambda t: t.replace("[scenario]", "[scenario]\nfamily = RAMP"), "either"),
        (lambda t: t.replace("set = complement_ball", "set = torus"), "torus"),
        (lambda t: t.replace("grid_h = 0.25", "grid_h = -1"), "grid_h"),
        (lambda t: t.replace("grid_h = 0.25", "gamma = 1.5"), "gamma"),
        (lambda t: "not an ini", "header"),
    ],
)
def test_bad_configs(edit, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(edit(BASE))


def test_linear_knots_and_sine_motion():
    text = """
[scenario]
dimension = 1
horizon = 4
x0 = 0
[piece 1]
start = 0
end = 2
set = box
lower = -1
upper = 1
motion = sine
amplitude = 0.5
direction = 1
[piece 2]
start = 2
end = 4
set = box
lower = -1
upper = 1
motion = linear
knots = 2: 0.5; 4: 0
"""
    cfg = parse_config(text)
    assert cfg.C.jump_times == (2.0,)  # 0.5 sin(2) != 0.5
    assert cfg.solve.grid.contains(2.0)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")
