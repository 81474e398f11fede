"""Cascaded flight controller: position -> velocity -> attitude -> rate.

The structure follows the standard multicopter cascade: a P position loop
produces a velocity setpoint, a PID velocity loop (plus gravity and
acceleration feed-forward) produces a world thrust vector, the thrust
vector and a yaw command define the attitude setpoint, a quaternion P
attitude loop produces rate setpoints, and a PID rate loop (derivative on
measurement) produces the desired body torque handed to the mixer.

Loop rates: rate and attitude loops run every tick (1 kHz), the velocity
loop at 250 Hz and the position loop at 100 Hz.

Anti-windup is conditional integration driven by the mixer's saturation
report of the previous tick: the velocity integrator freezes while the
throttle path is clamped, and each rate-loop axis freezes while its own
actuator is clamped.  Under CEA a servo clamp freezes the pitch and yaw
integrators together, because one surface carries both moments.

Gains are tuned once on the SEA averaged model for fast response with
small overshoot and frozen for both variants; comparisons always run both
variants with the identical set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import Wrench
from .errors import DegenerateThrustError, ValidationError
from .quat import GRAVITY, quat_conj, quat_from_matrix, quat_mul, wrap_angle
from .vehicle import VehicleParams

POSITION_DIVIDER = 10   # 100 Hz at the 1 kHz base tick
VELOCITY_DIVIDER = 4    # 250 Hz


@dataclass(frozen=True)
class ControlGains:
    pos_p: tuple = (1.3, 1.3, 1.3)          # 1/s
    vel_max: float = 3.0                    # m/s setpoint norm clamp
    vel_p: tuple = (3.5, 3.5, 4.0)          # 1/s
    vel_i: tuple = (1.5, 1.5, 2.0)          # 1/s^2
    vel_d: tuple = (0.0, 0.0, 0.0)          # dimensionless
    vel_int_limit: float = 3.0              # m/s^2 cap on the I contribution
    att_p: tuple = (7.0, 7.0, 10.0)         # 1/s
    rate_p: tuple = (1.2, 0.55, 2.0)        # N m s
    rate_i: tuple = (3.6, 1.8, 3.0)         # N m
    rate_d: tuple = (0.0, 0.0, 0.0)         # N m s^2
    rate_int_limit: float = 0.6             # N m cap on the I contribution
    max_tilt: float = math.radians(35.0)
    max_rate: float = math.radians(350.0)   # rad/s per axis
    tau_limit: tuple = (3.0, 1.5, 0.68)    # N m


@dataclass
class Setpoint:
    """Controller reference for one tick; fields of the active mode apply.

    position mode: position_d (+ optional velocity/acceleration feed-forward,
    yaw_d).  velocity mode: velocity_d (+ acceleration_d, yaw_d).  attitude
    mode: attitude_d quaternion plus the manual collective thrust demand
    f_t_d (position and velocity loops are off, as during take-off throttle
    ramps and the fixed-wing transition).
    """
    mode: str = "position"
    position_d: tuple = (0.0, 0.0, 1.0)
    velocity_d: tuple = (0.0, 0.0, 0.0)
    acceleration_d: tuple = (0.0, 0.0, 0.0)
    yaw_d: float = 0.0
    attitude_d: object = None
    f_t_d: float = 0.0


def validate_gains(g: ControlGains) -> ControlGains:
    for name in ("pos_p", "vel_p", "att_p", "rate_p"):
        if any(v <= 0.0 for v in getattr(g, name)):
            raise ValidationError(name, "P gains must be > 0")
    if g.vel_int_limit <= 0.0 or g.rate_int_limit <= 0.0:
        raise ValidationError("integrator limit", "must be > 0")
    return g


def position_loop(position, setpoint_pos, gains: ControlGains,
                  velocity_ff=None):
    """P law with feed-forward; output norm-clamped to vel_max."""
    v = np.asarray(gains.pos_p) * (np.asarray(setpoint_pos) - np.asarray(position))
    if velocity_ff is not None:
        v = v + np.asarray(velocity_ff)
    n = float(np.linalg.norm(v))
    if n > gains.vel_max:
        v *= gains.vel_max / n
    return v


def attitude_setpoint_from_thrust(thrust_world, yaw_d: float,
                                  max_tilt: float | None = None,
                                  eps: float = 0.1):
    """Attitude whose body -z axis carries the thrust vector, plus |F|.

    yaw_d fixes the remaining freedom (azimuth of the body x axis).  The
    tilt of the thrust direction is optionally limited to max_tilt by
    shrinking the horizontal component.  Raises DegenerateThrustError for
    |F| <= eps.
    """
    f = np.asarray(thrust_world, dtype=float).copy()
    if np.linalg.norm(f) <= eps:
        raise DegenerateThrustError(f"|F|={np.linalg.norm(f):.3g} N")
    if max_tilt is not None:
        fxy = math.hypot(f[0], f[1])
        fz = max(f[2], eps)
        if fxy > math.tan(max_tilt) * fz:
            scale = math.tan(max_tilt) * fz / fxy
            f[0] *= scale
            f[1] *= scale
            f[2] = fz
    f_t = float(np.linalg.norm(f))
    z_b = -f / f_t                       # body z in world
    x_c = np.array([math.cos(yaw_d), math.sin(yaw_d), 0.0])
    y_b = np.cross(z_b, x_c)
    n = np.linalg.norm(y_b)
    if n < 1e-6:
        # thrust nearly along the yaw heading; fall back to world z for yaw ref
        y_b = np.cross(z_b, np.array([0.0, 0.0, 1.0]))
        n = np.linalg.norm(y_b)
    y_b /= n
    x_b = np.cross(y_b, z_b)
    R = np.column_stack([x_b, y_b, z_b])
    return quat_from_matrix(R), f_t


def attitude_loop(q, q_d, gains: ControlGains):
    """Quaternion P law; invariant under sign flips of either argument."""
    qe = quat_mul(quat_conj(np.asarray(q)), np.asarray(q_d))
    if qe[0] < 0.0:
        qe = -qe
    w = 2.0 * np.asarray(gains.att_p) * qe[1:]
    return np.clip(w, -gains.max_rate, gains.max_rate)


class CascadeController:
    """Holds integrator state; owned by exactly one simulation loop."""

    def __init__(self, params: VehicleParams, gains: ControlGains, variant: str):
        self.p = params
        self.g = validate_gains(gains)
        self.variant = variant
        self.vel_int = np.zeros(3)
        self.vel_last_err = np.zeros(3)
        self.rate_int = np.zeros(3)
        self.last_omega = np.zeros(3)
        # held outputs of the slower loops
        self.v_d = np.zeros(3)
        self.thrust_world = params.mass * GRAVITY * np.array([0.0, 0.0, 1.0])
        self.q_d = None
        self.f_t_d = params.mass * GRAVITY

    def preload_pitch_trim(self, tau_y: float):
        """Seed the rate integrator with a known steady pitch torque.

        Airborne scenario starts represent a vehicle that has already been
        hovering trimmed; without this the canard trim moment produces an
        artificial startup transient.
        """
        if self.g.rate_i[1] > 0.0:
            self.rate_int[1] = tau_y / self.g.rate_i[1]

    def velocity_loop(self, velocity, v_d, accel_ff, dt, freeze=False):
        """PID + gravity/acceleration feed-forward -> world thrust vector."""
        e = v_d - np.asarray(velocity)
        if not freeze:
            self.vel_int = self.vel_int + e * dt
        gi = np.asarray(self.g.vel_i)
        lim = np.where(gi > 0.0, self.g.vel_int_limit / np.maximum(gi, 1e-12), np.inf)
        self.vel_int = np.clip(self.vel_int, -lim, lim)
        d_term = np.asarray(self.g.vel_d) * (e - self.vel_last_err) / dt
        self.vel_last_err = e
        acc = (np.asarray(self.g.vel_p) * e + gi * self.vel_int + d_term
               + np.asarray(accel_ff))
        return self.p.mass * (acc + np.array([0.0, 0.0, GRAVITY]))

    def rate_loop(self, omega, omega_d, dt, frozen_axes=(False, False, False)):
        """PID with derivative on measurement and conditional integration."""
        omega = np.asarray(omega)
        e = np.asarray(omega_d) - omega
        gi = np.asarray(self.g.rate_i)
        active = ~np.asarray(frozen_axes)
        self.rate_int = self.rate_int + np.where(active, e * dt, 0.0)
        lim = np.where(gi > 0.0, self.g.rate_int_limit / np.maximum(gi, 1e-12), np.inf)
        self.rate_int = np.clip(self.rate_int, -lim, lim)
        domega = (omega - self.last_omega) / dt
        self.last_omega = omega
        tau = (np.asarray(self.g.rate_p) * e + gi * self.rate_int
               - np.asarray(self.g.rate_d) * domega)
        return np.clip(tau, -np.asarray(self.g.tau_limit), np.asarray(self.g.tau_limit))

    def update(self, state, setpoint, tick: int, dt: float, last_report=None):
        """One 1 kHz control tick; returns the desired Wrench.

        state: SimState-like (position, velocity, attitude q, omega).
        setpoint: Setpoint (see simulation module).  last_report is the
        mixer's SaturationReport of the previous tick.
        """
        freeze_thrust = bool(last_report and (last_report.c1 or last_report.c2))
        frozen_axes = (last_report.axis_flags(self.variant) if last_report
                       else (False, False, False))

        if setpoint.mode == "attitude":
            self.q_d = np.asarray(setpoint.attitude_d)
            self.f_t_d = float(setpoint.f_t_d)
        else:
            if setpoint.mode == "position" and tick % POSITION_DIVIDER == 0:
                self.v_d = position_loop(state.position, setpoint.position_d,
                                         self.g, setpoint.velocity_d)
            elif setpoint.mode == "velocity":
                self.v_d = np.asarray(setpoint.velocity_d)
            if tick % VELOCITY_DIVIDER == 0:
                self.thrust_world = self.velocity_loop(
                    state.velocity, self.v_d, setpoint.acceleration_d,
                    VELOCITY_DIVIDER * dt, freeze=freeze_thrust)
            self.q_d, self.f_t_d = attitude_setpoint_from_thrust(
                self.thrust_world, setpoint.yaw_d, max_tilt=self.g.max_tilt)

        omega_d = attitude_loop(state.attitude, self.q_d, self.g)
        tau_d = self.rate_loop(state.omega, omega_d, dt, frozen_axes)
        return Wrench(max(0.0, self.f_t_d), tau_d)
