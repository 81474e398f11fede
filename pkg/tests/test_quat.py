import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from tailsim.quat import (Q_HOVER, euler_to_quat, quat_exp, quat_mul,
                          quat_normalize, quat_rotate, quat_to_euler,
                          quat_to_matrix, quat_from_matrix, tilt_angle,
                          wrap_angle)


def scipy_rot(q):
    # scipy uses x, y, z, w ordering
    return Rotation.from_quat([q[1], q[2], q[3], q[0]])


def test_rotate_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(100):
        q = quat_normalize(rng.normal(size=4))
        v = rng.normal(size=3)
        np.testing.assert_allclose(quat_rotate(q, v), scipy_rot(q).apply(v),
                                   atol=1e-12)


def test_mul_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a = quat_normalize(rng.normal(size=4))
        b = quat_normalize(rng.normal(size=4))
        got = quat_to_matrix(quat_mul(a, b))
        want = (scipy_rot(a) * scipy_rot(b)).as_matrix()
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_exp_matches_scipy_rotvec():
    rng = np.random.default_rng(2)
    for _ in range(100):
        w = rng.normal(scale=1.5, size=3)
        got = quat_to_matrix(quat_exp(w))
        want = Rotation.from_rotvec(w).as_matrix()
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_matrix_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(200):
        q = quat_normalize(rng.normal(size=4))
        q2 = quat_from_matrix(quat_to_matrix(q))
        assert min(np.abs(q2 - q).max(), np.abs(q2 + q).max()) < 1e-12


def test_hover_quaternion_points_thrust_up():
    up = quat_rotate(Q_HOVER, np.array([0.0, 0.0, -1.0]))
    np.testing.assert_allclose(up, [0, 0, 1], atol=1e-15)
    assert tilt_angle(Q_HOVER) == pytest.approx(0.0, abs=1e-12)


def test_euler_roundtrip():
    rng = np.random.default_rng(4)
    for _ in range(300):
        roll = rng.uniform(-1.2, 1.2)
        pitch = rng.uniform(-1.4, 1.4)
        yaw = rng.uniform(-math.pi, math.pi)
        r2, p2, y2 = quat_to_euler(euler_to_quat(roll, pitch, yaw))
        assert r2 == pytest.approx(roll, abs=1e-9)
        assert p2 == pytest.approx(pitch, abs=1e-9)
        assert abs(wrap_angle(y2 - yaw)) < 1e-9


def test_euler_zero_is_hover():
    np.testing.assert_allclose(euler_to_quat(0, 0, 0), Q_HOVER, atol=1e-15)


def test_yaw_spins_body_x_azimuth():
    for yaw in (0.0, 0.7, -2.0):
        q = euler_to_quat(0.0, 0.0, yaw)
        x_world = quat_rotate(q, np.array([1.0, 0.0, 0.0]))
        assert math.atan2(x_world[1], x_world[0]) == pytest.approx(yaw, abs=1e-12)
        assert x_world[2] == pytest.approx(0.0, abs=1e-12)


def test_pitch_tilts_thrust_forward():
    q = euler_to_quat(0.0, math.radians(-65.0), 0.0)
    thrust_dir = quat_rotate(q, np.array([0.0, 0.0, -1.0]))
    # pitch -65 deg tilts the thrust axis 65 deg toward world +x
    assert math.degrees(math.atan2(thrust_dir[0], thrust_dir[2])) == pytest.approx(65.0)
    assert tilt_angle(q) == pytest.approx(math.radians(65.0), abs=1e-12)


def test_wrap_angle_range_and_values():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(math.radians(359.0)) == pytest.approx(math.radians(-1.0))
    xs = np.linspace(-20, 20, 10001)
    w = wrap_angle(xs)
    assert (w > -math.pi - 1e-12).all() and (w <= math.pi + 1e-12).all()
    np.testing.assert_allclose(np.cos(w), np.cos(xs), atol=1e-12)
    np.testing.assert_allclose(np.sin(w), np.sin(xs), atol=1e-12)
