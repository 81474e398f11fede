"""Rotor and swashplateless-mechanism models at two fidelity levels.

Cyclic fidelity resolves the within-revolution throttle modulation

    U_i = C_i + A_i * cos(theta_i - phi_i + s_i * gamma0),   s_1 = +1, s_2 = -1

(s_i follows the spin direction; gamma0 compensates the hinge/blade inertia
lag).  The instantaneous lateral moment is a first-harmonic abstraction of
the blade flapping:

    m(theta) = k_lat * (U - C) * (-sin(alpha), cos(alpha)),
    alpha = theta + s_i * gamma_phys

with angles in the body x-y plane measured from the +y pitch axis.  Its
cycle average is exactly ``k_swash * A`` pointing at phi when gamma0 equals
the plant's true lag gamma_phys (k_lat = 2 * k_swash), which is what the
cycle-averaged model below assumes; the cross-fidelity selftest bounds the
residual mismatch.

The collective thrust follows a first-order lag toward k_thrust * U with
time constant motor_tau.  The cyclic moment deliberately does not pass
through that lag: at hover spin rates a 5 ms lag would attenuate the first
harmonic to ~0.3 amplitude with ~70 deg of phase, which is instead absorbed
by the hinge-lag compensation in hardware.

The rotor angle consumed by the throttle law is an encoder model: the true
angle is sampled at encoder_rate_hz, held, and extrapolated by the held spin
rate, mirroring angle-synchronous firmware.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import CyclicCommand, Wrench
from .errors import InsufficientDataError, StepSizeError
from .quat import wrap_angle
from .vehicle import VehicleParams

TWO_PI = 2.0 * math.pi

#: largest rotor_step dt accepted in cyclic fidelity (>= 50 samples/rev at
#: omega_max = 1200 rad/s needs dt <= 2*pi/1200/50 ~ 1e-4; the spec pin is 0.2 ms)
CYCLIC_DT_MAX = 2.0e-4 + 1e-12


@dataclass
class RotorState:
    theta: float = 0.0          # rad, wrapped to [0, 2*pi)
    omega: float = 0.0          # rad/s, signed by spin direction
    thrust_actual: float = 0.0  # N, lagged thrust state
    motor_index: int = 1        # {1, 2}
    # encoder sample-and-hold (internal)
    enc_theta: float = 0.0
    enc_omega: float = 0.0
    enc_age: float = 0.0


def spin_sign(motor_index: int, p: VehicleParams) -> int:
    return p.rotor_dir[motor_index - 1]


def cyclic_throttle(cmd: CyclicCommand, theta: float, motor_index: int,
                    gamma0: float, rotor_dir: int | None = None) -> float:
    """Total motor throttle at rotor angle theta, clamped to [0, 1].

    The clamp is inert whenever the command invariant A <= min(C, 1-C)
    holds (mixers guarantee it).
    """
    s = rotor_dir if rotor_dir is not None else (1 if motor_index == 1 else -1)
    u = cmd.c_nominal + cmd.amplitude * math.cos(theta - cmd.phi + s * gamma0)
    return 0.0 if u < 0.0 else 1.0 if u > 1.0 else u


def speed_map(u: float, p: VehicleParams) -> float:
    """Spin-rate magnitude for a given throttle (affine, clamped).

    Only the encoder angle rate needs realism, not the torque/speed physics.
    """
    u_hover = p.hover_throttle()
    w = p.omega_hover * (0.35 + 0.65 * u / u_hover)
    return min(max(w, 0.0), p.omega_max)


def _moment_dir(alpha: float) -> np.ndarray:
    # in-plane unit vector at angle alpha from the +y axis, CCW seen from +z
    return np.array([-math.sin(alpha), math.cos(alpha), 0.0])


def rotor_step(state: RotorState, cmd: CyclicCommand, dt: float,
               p: VehicleParams):
    """Advance one rotor by dt and return (new_state, Wrench).

    The wrench holds the instantaneous collective thrust along body -z and
    the body torque: swashplateless lateral moment plus the differential-
    thrust roll contribution -/+ arm_l * thrust (motor 1 sits at +y).
    """
    if dt > CYCLIC_DT_MAX:
        raise StepSizeError(f"rotor_step dt={dt} > 0.2 ms")
    s = spin_sign(state.motor_index, p)

    # encoder: sample-and-hold at encoder_rate_hz, extrapolate by held rate
    enc_period = 1.0 / p.encoder_rate_hz
    enc_age = state.enc_age + dt
    enc_theta, enc_omega = state.enc_theta, state.enc_omega
    if enc_age >= enc_period:
        enc_age = 0.0  # sample is taken at this step
        enc_theta = state.theta
        enc_omega = state.omega
    theta_est = enc_theta + enc_omega * enc_age

    u = cyclic_throttle(cmd, theta_est, state.motor_index, p.gamma0, s)

    # collective thrust lag
    if p.motor_tau > 0.0:
        alpha_lag = 1.0 - math.exp(-dt / p.motor_tau)
    else:
        alpha_lag = 1.0
    thrust = state.thrust_actual + alpha_lag * (p.k_thrust * u - state.thrust_actual)

    tau = p.k_lat * (u - cmd.c_nominal) * _moment_dir(state.theta + s * p.gamma_phys)
    arm = -p.arm_l if state.motor_index == 1 else p.arm_l
    tau[0] += arm * thrust

    omega = s * speed_map(thrust / p.k_thrust, p)
    theta = (state.theta + omega * dt) % TWO_PI

    new_state = RotorState(theta=theta, omega=omega, thrust_actual=thrust,
                           motor_index=state.motor_index,
                           enc_theta=enc_theta, enc_omega=enc_omega,
                           enc_age=enc_age)
    return new_state, Wrench(thrust, tau)


def averaged_rotor_wrench(cmd: CyclicCommand, motor_index: int,
                          p: VehicleParams) -> Wrench:
    """Cycle-averaged rotor wrench under the linear actuator model.

    thrust = k_thrust * C along -z; lateral moment k_swash * A at angle phi
    (phi in {0, pi} gives +/- k_swash * A about body y); roll contribution
    -/+ arm_l * thrust.
    """
    thrust = p.k_thrust * cmd.c_nominal
    tau = p.k_swash * cmd.amplitude * _moment_dir(cmd.phi)
    tau[0] += (-p.arm_l if motor_index == 1 else p.arm_l) * thrust
    return Wrench(thrust, tau)


def revolution_average(cmd: CyclicCommand, motor_index: int, p: VehicleParams,
                       dt: float = 5.0e-5, settle_revs: int = 10,
                       avg_revs: int = 30):
    """Run the cyclic model and average its wrench over whole revolutions.

    Returns (mean_thrust, mean_tau).  Used by the cross-fidelity check that
    licenses the averaged model.
    """
    state = RotorState(motor_index=motor_index,
                       thrust_actual=p.k_thrust * cmd.c_nominal)
    state.omega = spin_sign(motor_index, p) * speed_map(cmd.c_nominal, p)
    state.enc_omega = state.omega

    total = (settle_revs + avg_revs) * TWO_PI
    turned = 0.0
    start = settle_revs * TWO_PI
    acc = np.zeros(4)
    n = 0
    started = False
    end_mark = start
    while turned < total + TWO_PI:
        state, w = rotor_step(state, cmd, dt, p)
        turned += abs(state.omega) * dt
        if not started and turned >= start:
            started = True
            end_mark = turned + avg_revs * TWO_PI
        if started and turned <= end_mark:
            acc += np.array([w.f_t, w.tau[0], w.tau[1], w.tau[2]])
            n += 1
        elif started:
            break
    if n == 0:
        raise InsufficientDataError("rotor never completed averaging window")
    mean = acc / n
    return mean[0], mean[1:]


def calibrate_gamma0(trace, phi: float, gamma0_commanded: float = 0.0,
                     rotor_dir: int = 1) -> float:
    """Estimate the hinge lag from a test-stand trace.

    trace: sequence of (theta, moment_xy) pairs captured while commanding a
    cyclic amplitude at direction ``phi`` with ``gamma0_commanded`` applied.
    The first-harmonic projection of the moment gives its mean direction
    alpha (measured from +y); since alpha = phi + s*(gamma_phys - gamma0),
    the plant lag follows directly.  Requires >= 5 full revolutions of
    coverage and a nonzero modulation amplitude.
    """
    thetas = np.array([t for t, _ in trace], dtype=float)
    moments = np.array([np.asarray(m, dtype=float) for _, m in trace])
    if len(thetas) < 8:
        raise InsufficientDataError("trace too short")
    steps = np.abs(wrap_angle(np.diff(thetas)))
    if steps.sum() < 5.0 * TWO_PI:
        raise InsufficientDataError("trace covers fewer than 5 revolutions")
    mean = moments.mean(axis=0)
    if math.hypot(mean[0], mean[1]) < 1e-12:
        raise InsufficientDataError("no cyclic moment signal in trace")
    alpha = math.atan2(-mean[0], mean[1])
    return float(wrap_angle(gamma0_commanded + rotor_dir * (alpha - phi)))
