"""Quaternion and attitude utilities.

Quaternions are Hamilton convention, scalar first: q = [w, x, y, z], unit
norm, mapping body-frame vectors into the world frame (v_w = q * v_b * q_conj).

Frame conventions used throughout the package:

* body x is perpendicular to the main-wing plane, y runs along the wing,
  z points to the tail; collective thrust acts along body -z (toward the
  nose).  Roll/pitch/yaw are rotations about body x/y/z.
* world frame is East-North-Up; gravity is -9.81 m/s^2 on world z.
* the hover pose with yaw 0 is a 180 deg rotation about x: body -z up,
  body x aligned with world x.

Euler angles (roll, pitch, yaw) are defined relative to that hover pose:

    R_wb = Rz(yaw) @ HOVER @ Ry(pitch) @ Rx(roll)

so that all three angles are zero in upright hover, yaw is the azimuth of
the body x axis and pitch -65 deg is the fixed-wing attitude.  Because
Rx(pi) conjugates y/z rotations, this is equivalent to the aerospace ZYX
sequence with pitch negated and roll offset by pi, which is how the
extraction below works.
"""

from __future__ import annotations

import math

import numpy as np

GRAVITY = 9.81

# hover pose, yaw 0: 180 deg about body/world x
Q_HOVER = np.array([0.0, 1.0, 0.0, 0.0])


def quat_normalize(q):
    return q / math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v):
    """Rotate vector v (body) into the world frame by unit quaternion q."""
    w, x, y, z = q
    # v' = v + 2*r x (r x v + w v) with r = (x, y, z)
    rx, ry, rz = x, y, z
    cx = ry * v[2] - rz * v[1] + w * v[0]
    cy = rz * v[0] - rx * v[2] + w * v[1]
    cz = rx * v[1] - ry * v[0] + w * v[2]
    return np.array([
        v[0] + 2.0 * (ry * cz - rz * cy),
        v[1] + 2.0 * (rz * cx - rx * cz),
        v[2] + 2.0 * (rx * cy - ry * cx),
    ])


def quat_rotate_inv(q, v):
    """Rotate a world vector into the body frame."""
    return quat_rotate(quat_conj(q), v)


def quat_exp(w):
    """Exponential map: rotation vector w (rad, body) -> unit quaternion."""
    angle = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    if angle < 1e-12:
        # first-order expansion, renormalized by caller
        return np.array([1.0, 0.5 * w[0], 0.5 * w[1], 0.5 * w[2]])
    half = 0.5 * angle
    s = math.sin(half) / angle
    return np.array([math.cos(half), s * w[0], s * w[1], s * w[2]])


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(R):
    """Shepperd's method; returns the w >= 0 representative."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s, (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s, 0.25 * s,
                      (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s,
                      0.25 * s, (R[1, 2] + R[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s, 0.25 * s])
    if q[0] < 0.0:
        q = -q
    return quat_normalize(q)


def wrap_angle(a):
    """Wrap an angle (or array of angles) to (-pi, pi]."""
    out = np.mod(-np.asarray(a) + np.pi, 2.0 * np.pi)
    return -(out - np.pi)


def euler_to_quat(roll, pitch, yaw):
    """Tail-sitter Euler angles (hover-referenced, see module docstring)."""
    qz = np.array([math.cos(0.5 * yaw), 0.0, 0.0, math.sin(0.5 * yaw)])
    qy = np.array([math.cos(0.5 * pitch), 0.0, math.sin(0.5 * pitch), 0.0])
    qx = np.array([math.cos(0.5 * roll), math.sin(0.5 * roll), 0.0, 0.0])
    return quat_normalize(quat_mul(quat_mul(quat_mul(qz, Q_HOVER), qy), qx))


def quat_to_euler(q):
    """Inverse of euler_to_quat; returns (roll, pitch, yaw) in (-pi, pi].

    Uses the equivalent ZYX decomposition R = Rz(yaw) Ry(-pitch) Rx(pi+roll).
    Near the gimbal-lock pitch of +/-90 deg, yaw and roll are not separable
    and yaw absorbs the free angle.
    """
    w, x, y, z = q
    # ZYX extraction
    sp = -2.0 * (x * z - w * y)          # sin(pitch_zyx)
    sp = min(1.0, max(-1.0, sp))
    pitch_zyx = math.asin(sp)
    if abs(sp) > 1.0 - 1e-9:
        yaw = math.atan2(-2.0 * (x * y - w * z), 1.0 - 2.0 * (y * y + z * z))
        roll_zyx = math.pi  # degenerate: fold everything into yaw
    else:
        yaw = math.atan2(2.0 * (x * y + w * z), 1.0 - 2.0 * (y * y + z * z))
        roll_zyx = math.atan2(2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y))
    pitch = -pitch_zyx
    roll = float(wrap_angle(roll_zyx - math.pi))
    return roll, pitch, float(wrap_angle(yaw))


def tilt_angle(q):
    """Angle between the thrust axis (body -z in world) and world up."""
    up = quat_rotate(q, np.array([0.0, 0.0, -1.0]))
    return math.acos(min(1.0, max(-1.0, up[2])))
