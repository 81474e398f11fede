import math
from dataclasses import replace

import numpy as np
import pytest

from tailsim.allocation import ActuatorCommand, CyclicCommand, sea_mix, Wrench
from tailsim.dynamics import (SimState, ground_contact, integrate_step,
                              total_wrench)
from tailsim.environment import WindField
from tailsim.errors import StepSizeError
from tailsim.propulsion import RotorState
from tailsim.quat import GRAVITY, quat_rotate, quat_to_matrix
from tailsim.scenarios import hover_state
from tailsim.vehicle import VehicleParams

P = VehicleParams()
NO_WIND = WindField()


def test_step_size_guard():
    s = SimState()
    with pytest.raises(StepSizeError):
        integrate_step(s, np.zeros(3), np.zeros(3), 2e-3, P)
    with pytest.raises(StepSizeError):
        integrate_step(s, np.zeros(3), np.zeros(3), 5e-4, P, fidelity="cyclic")


def test_free_body_conserves_momenta():
    s = SimState(position=np.zeros(3), velocity=np.array([1.0, 2.0, 3.0]),
                 omega=np.array([0.3, -0.4, 0.2]))
    L0 = quat_rotate(s.attitude, P.inertia_diag * s.omega)   # world frame
    p0 = s.velocity.copy()
    for _ in range(10000):
        s = integrate_step(s, np.zeros(3), np.zeros(3), 1e-3, P)
    np.testing.assert_allclose(s.velocity, p0, atol=1e-9)
    L1 = quat_rotate(s.attitude, P.inertia_diag * s.omega)
    np.testing.assert_allclose(L1, L0, atol=1e-9)


def test_free_body_momentum_aggressive_tumble():
    s = SimState(position=np.zeros(3), omega=np.array([0.8, -1.1, 0.5]))
    L0 = quat_rotate(s.attitude, P.inertia_diag * s.omega)
    for _ in range(10000):
        s = integrate_step(s, np.zeros(3), np.zeros(3), 1e-3, P)
    L1 = quat_rotate(s.attitude, P.inertia_diag * s.omega)
    assert np.abs(L1 - L0).max() / np.linalg.norm(L0) < 1e-7


def test_constant_force_kinematics():
    s = SimState()
    f = np.array([0.0, 0.0, P.mass * GRAVITY])
    for _ in range(1000):
        s = integrate_step(s, np.zeros(3), f, 1e-3, P)
    assert s.velocity[2] == pytest.approx(9.81, abs=1e-9)
    assert s.time == pytest.approx(1.0)


def test_pure_pitch_torque_closed_form():
    s = SimState(position=np.array([0.0, 0.0, 50.0]))
    tau = np.array([0.0, P.inertia[1], 0.0])   # 1 rad/s^2 about y
    for _ in range(1000):
        s = integrate_step(s, tau, np.zeros(3), 1e-3, P)
    assert s.omega[1] == pytest.approx(1.0, abs=1e-9)


def test_energy_conservation_and_quaternion_norm():
    s = SimState(position=np.array([0.0, 0.0, 100.0]),
                 velocity=np.array([1.0, -2.0, 3.0]),
                 omega=np.array([1.0, -2.0, 0.7]))
    inertia = P.inertia_diag

    def energy(st):
        return (0.5 * P.mass * st.velocity @ st.velocity
                + P.mass * GRAVITY * st.position[2]
                + 0.5 * st.omega @ (inertia * st.omega))

    e0 = energy(s)
    gravity = np.array([0.0, 0.0, -P.mass * GRAVITY])
    for _ in range(10000):
        s = integrate_step(s, np.zeros(3), gravity, 1e-3, P)
        assert abs(np.linalg.norm(s.attitude) - 1.0) < 1e-12
    assert abs(energy(s) - e0) / abs(e0) < 1e-6


def test_gyroscopic_term_present():
    # with distinct inertias, an initial tumble precesses: omega changes
    # even with zero applied torque
    s = SimState(position=np.array([0.0, 0.0, 50.0]),
                 omega=np.array([2.0, 1.0, 0.0]))
    w0 = s.omega.copy()
    for _ in range(100):
        s = integrate_step(s, np.zeros(3), np.zeros(3), 1e-3, P)
    assert np.abs(s.omega - w0).max() > 1e-3


# ------------------------------------------------------------ total wrench

def hover_cmd(p=P):
    cmd, _ = sea_mix(Wrench(p.hover_thrust(), np.zeros(3)), p)
    return cmd


def test_hover_equilibrium_high_altitude():
    p = replace(P, trim_tau_y=0.0)   # the canard trim is an external moment
    state = hover_state(p, (0.0, 0.0, 10.0))
    _, _, tau, force, _ = total_wrench(state, hover_cmd(p), NO_WIND,
                                       "averaged", p, 1e-3)
    np.testing.assert_allclose(force, 0.0, atol=1e-9)
    np.testing.assert_allclose(tau, 0.0, atol=1e-9)


def test_trim_moment_enters_wrench():
    state = hover_state(P, (0.0, 0.0, 10.0))
    _, _, tau, _, _ = total_wrench(state, hover_cmd(), NO_WIND, "averaged", P, 1e-3)
    assert tau[1] == pytest.approx(P.trim_tau_y, abs=1e-9)


def test_ground_effect_touches_only_elevon_terms():
    p = replace(P, trim_tau_y=0.0)
    for h in (0.0, 10.0):
        state = hover_state(p, (0.0, 0.0, h))
        _, _, tau, force, _ = total_wrench(state, hover_cmd(p), NO_WIND,
                                           "averaged", p, 1e-3)
        np.testing.assert_allclose(tau, 0.0, atol=1e-9)   # no deflection, no change
        np.testing.assert_allclose(force, 0.0, atol=1e-9)


def test_elevon_height_ratio_through_total_wrench():
    p = replace(P, trim_tau_y=0.0)
    cmd = ActuatorCommand(cyclic=hover_cmd(p).cyclic, servo=(0.1, 0.1))
    taus = {}
    for h in (0.0, 2.0):
        state = hover_state(p, (0.0, 0.0, h))
        state = replace(state,
                        surfaces=(type(state.surfaces[0])(delta=0.1),
                                  type(state.surfaces[1])(delta=0.1)))
        _, _, tau, _, _ = total_wrench(state, cmd, NO_WIND, "averaged", p, 1e-3)
        taus[h] = tau[2]
    assert taus[0.0] / taus[2.0] == pytest.approx(0.05, abs=1e-9)


# ----------------------------------------------------------- ground contact

def test_resting_stays_on_gear():
    s = SimState(position=np.array([0.0, 0.0, P.gear_height]),
                 velocity=np.array([0.1, 0.0, -0.2]))
    out = ground_contact(s, P, 1e-3, upward_force=-5.0)
    assert out.position[2] == P.gear_height
    np.testing.assert_allclose(out.velocity, 0.0)


def test_liftoff_when_upward_force_positive():
    s = SimState(position=np.array([0.0, 0.0, P.gear_height - 1e-6]),
                 velocity=np.array([0.0, 0.0, 0.05]))
    out = ground_contact(s, P, 1e-3, upward_force=+2.0)
    assert out.position[2] == pytest.approx(P.gear_height)
    assert out.velocity[2] == pytest.approx(0.05)   # kept: lifting off freely


def test_airborne_is_identity():
    s = SimState(position=np.array([0.0, 0.0, 1.0]),
                 velocity=np.array([0.0, 0.0, -0.5]))
    out = ground_contact(s, P, 1e-3, upward_force=-5.0)
    assert out is s


def test_gear_spring_restores_tilt():
    from tailsim.quat import euler_to_quat
    s = SimState(position=np.array([0.0, 0.0, P.gear_height]),
                 attitude=euler_to_quat(0.0, 0.1, 0.0))
    out = ground_contact(s, P, 1e-3, upward_force=-10.0)
    assert out.omega[1] < 0.0   # pushes pitch back toward upright


def test_liftoff_timing_with_thrust_ramp():
    """Liftoff occurs within one tick of thrust crossing weight."""
    p = replace(P, trim_tau_y=0.0, motor_tau=0.0)
    state = SimState(position=np.array([0.0, 0.0, p.gear_height]))
    dt = 1e-3
    crossed = lifted = None
    for k in range(3000):
        t = k * dt
        f_t = p.hover_thrust() * min(t / 2.0, 1.2)   # ramp, crosses mg at t=2
        cmd, _ = sea_mix(Wrench(f_t, np.zeros(3)), p)
        rotors, surfaces, tau, force, _ = total_wrench(state, cmd, NO_WIND,
                                                       "averaged", p, dt)
        state = integrate_step(state, tau, force, dt, p)
        state = replace(state, rotors=rotors, surfaces=surfaces)
        state = ground_contact(state, p, dt, upward_force=force[2])
        if crossed is None and force[2] > 0:
            crossed = t
        if lifted is None and state.position[2] > p.gear_height + 1e-9:
            lifted = t
            break
    assert crossed is not None and lifted is not None
    assert lifted - crossed <= 2 * dt


def test_determinism_bitwise():
    def run():
        s = hover_state(P, (0.0, 0.0, 1.0))
        out = []
        for _ in range(500):
            rotors, surfaces, tau, force, _ = total_wrench(
                s, hover_cmd(), NO_WIND, "averaged", P, 1e-3)
            s = integrate_step(s, tau, force, 1e-3, P)
            s = replace(s, rotors=rotors, surfaces=surfaces)
            out.append(s.position.copy())
        return np.array(out)

    a, b = run(), run()
    assert (a == b).all()   # bit-identical


def test_cyclic_fidelity_hover_smoke():
    """Full 6-DOF loop at cyclic fidelity holds hover."""
    from tailsim.control import ControlGains, Setpoint
    from tailsim.simulation import Simulation
    sp = Setpoint(mode="position", position_d=(0.0, 0.0, 1.0))
    sim = Simulation(P, ControlGains(), "sea", "cyclic",
                     setpoint_fn=lambda t: sp,
                     initial_state=hover_state(P, (0.0, 0.0, 1.0)))
    sim.controller.preload_pitch_trim(-P.trim_tau_y)
    trace = sim.run(0.5)
    assert abs(trace[-1, 3] - 1.0) < 0.05       # altitude held
    assert np.isfinite(trace).all()
