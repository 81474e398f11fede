"""Rigid-body state, wrench aggregation, integration, ground contact.

The 6-DOF state integrates with fixed-step RK4 on the angular velocity
(Euler's equation with diagonal inertia and the gyroscopic term) and exact
constant-force updates on the translational states; the attitude quaternion
advances by the exponential map of the Simpson-weighted body rate and is
renormalized every step.  Fixed stepping keeps runs bit-reproducible.

Actuator internal states (rotor thrust lag, rotor angle, servo slew) are
advanced together with the wrench aggregation in total_wrench, since the
wrench depends on them.  Servo commands are refreshed by the simulation at
50 Hz (standard servo PWM) and the surfaces slew toward the held command at
servo_rate_limit.

Ground contact is a stance model: while the gear carries weight the
vertical position is clamped, velocity is zeroed (stance friction holds the
footprint), and a critically damped spring on roll/pitch models the gear
stance.  The vehicle leaves the model the first instant net upward force
turns positive.  Controllers read true state; no sensor noise (the
comparisons here are about actuation, not estimation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .aero import SurfaceState, elevon_wrench, propwash_speed, strip_positions, wing_wrench
from .allocation import ActuatorCommand, Wrench
from .environment import WindField, wind_at, wind_at_points
from .errors import StepSizeError
from .propulsion import RotorState, averaged_rotor_wrench, rotor_step, speed_map, spin_sign
from .quat import (GRAVITY, quat_exp, quat_mul, quat_normalize, quat_rotate,
                   quat_rotate_inv, quat_to_matrix)
from .vehicle import VehicleParams

AVERAGED_DT_MAX = 1.0e-3 + 1e-12
CYCLIC_DT_MAX = 2.0e-4 + 1e-12

GEAR_STIFFNESS = 50.0  # N m / rad, stance spring on roll and pitch


@dataclass
class SimState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0, 0.0]))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotors: tuple = (RotorState(motor_index=1), RotorState(motor_index=2))
    surfaces: tuple = (SurfaceState(), SurfaceState())
    time: float = 0.0

    def is_finite(self):
        return bool(np.isfinite(self.position).all() and np.isfinite(self.velocity).all()
                    and np.isfinite(self.attitude).all() and np.isfinite(self.omega).all()
                    and all(math.isfinite(r.thrust_actual) for r in self.rotors)
                    and all(math.isfinite(s.delta) for s in self.surfaces))


def _advance_rotor_averaged(rotor: RotorState, cyc, dt: float, p: VehicleParams):
    """Cycle-averaged rotor: lagged thrust, ideal mean moment."""
    if p.motor_tau > 0.0:
        a = 1.0 - math.exp(-dt / p.motor_tau)
    else:
        a = 1.0
    thrust = rotor.thrust_actual + a * (p.k_thrust * cyc.c_nominal - rotor.thrust_actual)
    s = spin_sign(rotor.motor_index, p)
    omega = s * speed_map(thrust / p.k_thrust, p)
    theta = (rotor.theta + omega * dt) % (2.0 * math.pi)
    new = replace(rotor, theta=theta, omega=omega, thrust_actual=thrust)
    w = averaged_rotor_wrench(cyc, rotor.motor_index, p)
    # moment from the mean map, thrust/roll from the lagged state
    arm = -p.arm_l if rotor.motor_index == 1 else p.arm_l
    tau = w.tau.copy()
    tau[0] += arm * (thrust - w.f_t)
    return new, thrust, tau


def _advance_servo(surface: SurfaceState, held_cmd: float, dt: float,
                   p: VehicleParams) -> SurfaceState:
    """First-order tracking toward the held command, slew-rate limited."""
    target = min(max(held_cmd, -p.servo_limit), p.servo_limit)
    if p.servo_tau > 0.0:
        want = (1.0 - math.exp(-dt / p.servo_tau)) * (target - surface.delta)
    else:
        want = target - surface.delta
    step = p.servo_rate_limit * dt
    delta = surface.delta + min(max(want, -step), step)
    return SurfaceState(delta=delta, delta_cmd=target)


def total_wrench(state: SimState, cmd: ActuatorCommand, env: WindField,
                 fidelity: str, p: VehicleParams, dt: float,
                 servo_held=None):
    """Aggregate body torque and world force for one physics substep.

    Advances the actuator internal states (rotor lag/angle, servo slew) and
    returns (rotors, surfaces, tau_body, force_world, diagnostics).  Sums
    rotor wrenches at the requested fidelity, elevon moments scaled by
    propwash and ground effect, the flat-plate wing wrench under the wind
    field, gravity, and the constant canard trim moment.
    """
    if servo_held is None:
        servo_held = cmd.servo
    tau = np.zeros(3)
    force_world = np.zeros(3)

    rotors = []
    thrusts = []
    for rotor, cyc in zip(state.rotors, cmd.cyclic):
        if fidelity == "cyclic":
            new, w = rotor_step(rotor, cyc, dt, p)
            thrust, rtau = w.f_t, w.tau
        else:
            new, thrust, rtau = _advance_rotor_averaged(rotor, cyc, dt, p)
        rotors.append(new)
        thrusts.append(thrust)
        tau += rtau
    thrust_total = thrusts[0] + thrusts[1]
    force_world += quat_rotate(state.attitude, np.array([0.0, 0.0, -thrust_total]))

    surfaces = [
        _advance_servo(s, h, dt, p) for s, h in zip(state.surfaces, servo_held)
    ]
    height = max(0.0, state.position[2])
    wash = (propwash_speed(thrusts[0], p), propwash_speed(thrusts[1], p))
    e_tau, e_force_b = elevon_wrench(surfaces, wash, height, p)
    tau += e_tau
    force_world += quat_rotate(state.attitude, e_force_b)

    R = quat_to_matrix(state.attitude)
    strip_world = state.position[None, :] + strip_positions(p) @ R.T
    winds = wind_at_points(strip_world, state.time, env)
    w_tau, w_force_b = wing_wrench(state.velocity, winds, state.attitude, p,
                                   omega_body=state.omega)
    tau += w_tau
    force_world += R @ w_force_b

    force_world[2] -= p.mass * GRAVITY
    tau[1] += p.trim_tau_y

    diag = {
        "thrusts": thrusts,
        "wind_com": wind_at(state.position, state.time, env),
        "f_t": thrust_total,
    }
    return tuple(rotors), tuple(surfaces), tau, force_world, diag


def integrate_step(state: SimState, tau_body, force_world, dt: float,
                   p: VehicleParams, fidelity: str = "averaged") -> SimState:
    """Newton-Euler step under a wrench held constant over dt."""
    limit = CYCLIC_DT_MAX if fidelity == "cyclic" else AVERAGED_DT_MAX
    if dt <= 0.0 or dt > limit:
        raise StepSizeError(f"dt={dt} outside (0, {limit}] for {fidelity} fidelity")

    acc = np.asarray(force_world) / p.mass
    velocity = state.velocity + acc * dt
    position = state.position + state.velocity * dt + 0.5 * acc * dt * dt

    inertia = p.inertia_diag
    tau = np.asarray(tau_body)

    def omega_dot(w):
        return (tau - np.cross(w, inertia * w)) / inertia

    w0 = state.omega
    k1 = omega_dot(w0)
    k2 = omega_dot(w0 + 0.5 * dt * k1)
    k3 = omega_dot(w0 + 0.5 * dt * k2)
    k4 = omega_dot(w0 + dt * k3)
    omega = w0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    # body rotation over the step: two half-step exponentials with
    # Simpson-weighted rates (the composition keeps the non-commutativity
    # error small enough for 1e-9 momentum conservation over 10 s)
    w_mid = w0 + 0.5 * dt * k2
    w_q1 = 0.375 * w0 + 0.75 * w_mid - 0.125 * omega    # quadratic at dt/4
    w_q3 = -0.125 * w0 + 0.75 * w_mid + 0.375 * omega   # quadratic at 3dt/4
    h1 = dt / 12.0 * (w0 + 4.0 * w_q1 + w_mid)
    h2 = dt / 12.0 * (w_mid + 4.0 * w_q3 + omega)
    attitude = quat_normalize(
        quat_mul(quat_mul(state.attitude, quat_exp(h1)), quat_exp(h2)))

    return replace(state, position=position, velocity=velocity,
                   attitude=attitude, omega=omega, time=state.time + dt)


def ground_contact(state: SimState, p: VehicleParams, dt: float,
                   platform_height: float = 0.0,
                   upward_force: float = 0.0) -> SimState:
    """Stance model; identity once airborne.

    While the CoM sits at gear height and the net upward force is not yet
    positive, the vertical position is clamped, velocity is zeroed and a
    critically damped spring on roll/pitch models the gear stance.
    """
    contact_z = platform_height + p.gear_height
    if state.position[2] > contact_z + 1e-12:
        return state
    position = state.position.copy()
    position[2] = contact_z
    if upward_force > 0.0:
        return replace(state, position=position)

    velocity = np.zeros(3)
    up_b = quat_rotate_inv(state.attitude, np.array([0.0, 0.0, 1.0]))
    r = np.cross(up_b, np.array([0.0, 0.0, -1.0]))
    inertia = p.inertia_diag
    damping = 2.0 * np.sqrt(GEAR_STIFFNESS * inertia)
    tau_gear = -GEAR_STIFFNESS * r - damping * state.omega
    tau_gear[2] = 0.0
    omega = state.omega + dt * tau_gear / inertia
    return replace(state, position=position, velocity=velocity, omega=omega)
