import math

import numpy as np
import pytest

from proxsweep import geometry as geo
from proxsweep.dynamics import (
    Circular,
    Constant,
    CrossesJump,
    MovingSet,
    OutOfHorizon,
    Piece,
    PiecewiseLinear,
    Sinusoidal,
    at,
    hausdorff_bound,
    jump_amplitude,
    translated,
)
from proxsweep import lab


def two_piece():
    zero = Constant([0.0])
    return MovingSet([Piece(0.0, 1.0, geo.Box([0.0], [1.0]), zero), Piece(1.0, 2.0, geo.Box([2.0], [3.0]), zero)], 2.0)


def ramp():
    return translated(geo.Box([-1.0], [1.0]), PiecewiseLinear.from_knots([(0.0, [0.0]), (2.0, [2.0])]), 2.0)


def moving_hole():
    return translated(
        geo.ComplementOfOpenBall([0.0, 0.0], 1.0), PiecewiseLinear.from_knots([(0.0, [0, 0]), (1.0, [1, 0])]), 1.0
    )


def test_at_translates_interval():
    S = at(ramp(), 1.0)
    assert S.distance(np.array([0.0])) == 0.0 and S.distance(np.array([2.0])) == 0.0
    assert S.distance(np.array([2.5])) == pytest.approx(0.5)
    assert S.distance(np.array([-0.5])) == pytest.approx(0.5)


def test_at_is_right_continuous_at_jump():
    C = two_piece()
    S = at(C, 1.0)
    assert S.distance(np.array([2.0])) == 0.0 and S.distance(np.array([1.0])) == 1.0
    assert at(C, 1.0 - 1e-12).distance(np.array([1.0])) == 0.0
    assert C.jump_times == (1.0,)


def test_at_moving_hole():
    S = at(moving_hole(), 0.5)
    np.testing.assert_allclose(S.nearest(np.array([0.6, 0.0])), [1.5, 0.0])
    assert S.rho == 1.0


def test_at_outside_horizon():
    with pytest.raises(OutOfHorizon):
        at(ramp(), 2.5)
    with pytest.raises(OutOfHorizon):
        at(ramp(), -0.1)


def test_hausdorff_bound_examples():
    path = PiecewiseLinear.from_knots([(0.0, [0.0]), (1.0, [1.0])])
    C = translated(geo.Box([-1.0], [1.0]), path, 1.0)
    assert hausdorff_bound(C, 0.25, 0.75) == pytest.approx(0.5)
    C0 = translated(geo.Ball([0.0, 0.0], 1.0), Constant([0.0, 0.0]), 3.0)
    assert hausdorff_bound(C0, 0.3, 2.9) == 0.0
    Cs = translated(geo.Box([-1.0], [1.0]), Sinusoidal(1.0, 1.0, 0.0, [1.0]), 2 * math.pi)
    assert hausdorff_bound(Cs, 0.0, math.pi / 2) == pytest.approx(1.0)


def test_hausdorff_bound_crosses_jump():
    with pytest.raises(CrossesJump):
        hausdorff_bound(two_piece(), 0.5, 1.5)


def test_hausdorff_bound_is_true_hausdorff_for_intervals():
    C = ramp()
    # for intervals of equal length the Hausdorff distance is the shift of the centres
    for s, t in [(0.1, 0.4), (0.0, 2.0), (1.2, 1.3)]:
        a, b = at(C, s), at(C, t)
        pts = np.linspace(-3, 5, 8001)[:, None]
        inside_a = pts[[a.distance(p) == 0 for p in pts]]
        inside_b = pts[[b.distance(p) == 0 for p in pts]]
        h = max(max(b.distance(p) for p in inside_a), max(a.distance(p) for p in inside_b))
        assert hausdorff_bound(C, s, t) == pytest.approx(h, abs=2e-3)


def test_jump_amplitude_examples():
    C = two_piece()
    assert jump_amplitude(C, 1.0, [0.0]) == 2.0
    assert jump_amplitude(C, 1.0, [2.5]) == 0.0
    with pytest.raises(ValueError):
        jump_amplitude(C, 0.5, [0.0])


def test_jump_amplitude_moving_hole():
    base = geo.ComplementOfOpenBall([0.0, 0.0], 1.0)
    C = MovingSet([Piece(0.0, 1.0, base, Constant([0.0, 0.0])), Piece(1.0, 2.0, base, Constant([0.3, 0.0]))], 2.0)
    probe = np.array([math.cos(0.5), math.sin(0.5)])  # on the old boundary, inside the new hole
    expected = 1.0 - float(np.linalg.norm(probe - np.array([0.3, 0.0])))
    assert expected > 0.2
    assert jump_amplitude(C, 1.0, probe) == pytest.approx(expected)


def test_continuous_boundary_is_not_a_jump():
    box = geo.Box([-1.0], [1.0])
    C = MovingSet(
        [
            Piece(0.0, 1.0, box, PiecewiseLinear.from_knots([(0.0, [0.0]), (1.0, [1.0])])),
            Piece(1.0, 2.0, box, Constant([1.0])),
        ],
        2.0,
    )
    assert C.jump_times == ()
    assert C.boundaries == (1.0,)


def test_partition_validation():
    box = geo.Box([0.0], [1.0])
    with pytest.raises(ValueError):
        MovingSet([Piece(0.0, 1.0, box, Constant([0.0])), Piece(1.5, 2.0, box, Constant([0.0]))], 2.0)
    with pytest.raises(ValueError):
        MovingSet([Piece(0.5, 2.0, box, Constant([0.0]))], 2.0)
    with pytest.raises(ValueError):
        MovingSet([Piece(0.0, 1.0, box, Constant([0.0, 0.0]))], 1.0)


def test_rho_is_min_over_pieces():
    C = MovingSet(
        [
            Piece(0.0, 1.0, geo.ComplementOfOpenBall([0.0, 0.0], 2.0), Constant([0.0, 0.0])),
            Piece(1.0, 2.0, geo.ComplementOfOpenBall([0.0, 0.0], 0.5), Constant([0.0, 0.0])),
        ],
        2.0,
    )
    assert C.rho == 0.5
    for t in np.linspace(0, 2, 21):
        assert geo.prox_constant(C.at(float(t))) >= C.rho


def test_motion_paths():
    p = PiecewiseLinear.from_knots([(0.0, [0.0, 0.0]), (1.0, [1.0, 2.0]), (3.0, [1.0, 0.0])])
    np.testing.assert_allclose(p(0.5), [0.5, 1.0])
    np.testing.assert_allclose(p(2.0), [1.0, 1.0])
    np.testing.assert_allclose(p(5.0), [1.0, 0.0])
    with pytest.raises(ValueError):
        PiecewiseLinear.from_knots([(1.0, [0.0]), (1.0, [1.0])])
    c = Circular(2.0, 1.0, 0.0)
    np.testing.assert_allclose(c(math.pi / 2), [0.0, 2.0], atol=1e-15)


def test_builtin_distance_upper_semicontinuous_off_jumps():
    """Distance of a fixed probe to C(t) varies by at most the set motion between samples."""
    rng = np.random.default_rng(3)
    for s in lab.builtin_scenarios():
        ts = np.linspace(0.0, s.horizon, 401)
        for _ in range(5):
            probe = rng.uniform(-2, 2, s.C.dim)
            d = [s.C.at(float(t)).distance(probe) for t in ts]
            for k in range(len(ts) - 1):
                a, b = float(ts[k]), float(ts[k + 1])
                try:
                    bound = s.C.hausdorff_bound(a, b)
                except CrossesJump:
                    continue
                assert abs(d[k + 1] - d[k]) <= bound + 1e-12


def test_freeze_agrees_on_grid_and_holds_right_value():
    C = ramp()
    F = C.freeze([0.0, 0.5, 1.0, 1.5, 2.0])
    for t in (0.0, 0.5, 1.0, 2.0):
        assert F.at(t).distance(C.at(t).nearest(np.array([9.0]))) == 0.0
    # on (0.5, 1.0] the frozen set is C(1.0)
    np.testing.assert_allclose(F.at(0.7).nearest(np.array([9.0])), [2.0])
    assert F.hausdorff_bound(0.6, 0.9) == 0.0
    with pytest.raises(CrossesJump):
        F.hausdorff_bound(0.4, 0.6)
