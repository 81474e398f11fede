import math

import numpy as np
import pytest

from tailsim.aero import wing_wrench
from tailsim.environment import FAN_RAMP_TAU, Fan, WindField, wind_at, wind_at_points
from tailsim.quat import Q_HOVER
from tailsim.vehicle import VehicleParams


def fan(**kw):
    args = dict(position=(1.0, 0.0, 1.0), axis=(-1.0, 0.0, 0.0),
                v_ref=4.5, d_ref=1.0, jet_radius=0.6, decay_exp=1.0)
    args.update(kw)
    return Fan(**args)


def test_reference_speed_at_reference_distance():
    field = WindField(kind="fan", fans=(fan(),))
    w = wind_at((0.0, 0.0, 1.0), 10.0, field)
    assert np.allclose(w, [-4.5, 0.0, 0.0])


def test_constant_inside_reference_distance():
    field = WindField(kind="fan", fans=(fan(),))
    w = wind_at((0.5, 0.0, 1.0), 10.0, field)
    assert np.linalg.norm(w) == pytest.approx(4.5)


def test_inverse_distance_decay():
    field = WindField(kind="fan", fans=(fan(),))
    w = wind_at((-1.0, 0.0, 1.0), 10.0, field)   # 2 m downstream
    assert np.linalg.norm(w) == pytest.approx(2.25)


def test_zero_behind_fan_and_outside_jet():
    field = WindField(kind="fan", fans=(fan(),))
    assert np.allclose(wind_at((2.0, 0.0, 1.0), 10.0, field), 0.0)
    assert np.allclose(wind_at((0.0, 0.7, 1.0), 10.0, field), 0.0)


def test_schedule_off_and_spinup_ramp():
    field = WindField(kind="fan", fans=(fan(schedule=((2.0, 7.0),)),))
    p = (0.0, 0.0, 1.0)
    assert np.allclose(wind_at(p, 1.0, field), 0.0)
    early = np.linalg.norm(wind_at(p, 2.0 + 0.05, field))
    late = np.linalg.norm(wind_at(p, 2.0 + 5 * FAN_RAMP_TAU, field))
    assert 0.0 < early < 4.5 * 0.2
    assert late == pytest.approx(4.5, rel=0.01)
    # decays after switch-off
    assert np.linalg.norm(wind_at(p, 7.0 + 3 * FAN_RAMP_TAU, field)) < 4.5 * 0.06


def test_continuous_at_jet_edge_and_bounded():
    field = WindField(kind="fan", fans=(fan(),))
    ys = np.linspace(-0.7, 0.7, 1401)
    speeds = [np.linalg.norm(wind_at((0.0, y, 1.0), 5.0, field)) for y in ys]
    assert max(speeds) <= 4.5 + 1e-12
    # steepest admissible slope is the cosine feather over the outer 20%
    step = ys[1] - ys[0]
    lipschitz = 4.5 * math.pi / (2.0 * 0.2 * 0.6)
    assert np.abs(np.diff(speeds)).max() <= lipschitz * step * 1.01


def test_uniform_and_none_fields():
    assert np.allclose(wind_at((1, 2, 3), 0.0,
                               WindField(kind="uniform", uniform=(1.0, -2.0, 0.5))),
                       [1.0, -2.0, 0.5])
    assert np.allclose(wind_at((1, 2, 3), 0.0, WindField()), 0.0)


def test_invalid_fan_rejected():
    with pytest.raises(ValueError):
        WindField(kind="fan", fans=(fan(d_ref=0.0),))


def test_balanced_pair_zero_net_yaw_on_symmetric_vehicle():
    p = VehicleParams()
    field = WindField(kind="fan", fans=(fan(position=(1.0, 0.3, 1.0), jet_radius=0.3),
                                        fan(position=(1.0, -0.3, 1.0), jet_radius=0.3)))
    from tailsim.aero import strip_positions
    from tailsim.quat import quat_to_matrix
    strips_w = np.array([0.0, 0.0, 1.0]) + strip_positions(p) @ quat_to_matrix(Q_HOVER).T
    winds = wind_at_points(strips_w, 5.0, field)
    tau, _ = wing_wrench(np.zeros(3), winds, Q_HOVER, p)
    assert abs(tau[2]) < 1e-9
    assert abs(tau[0]) < 1e-9
