"""Built-in property suite: the checks that license the whole model.

Five property groups, each printable as a pass/fail line:

* mixer round-trip: forward_map(mix(w)) == w to 1e-9 for 1000 random
  unsaturated wrenches, both variants;
* cyclic signal identities: the cycle mean of the modulated throttle is C
  and its first-harmonic amplitude is A, to 1e-9 on a dense angle grid;
* cross-fidelity: the revolution-averaged wrench of the cyclic rotor model
  matches the averaged model within 2% magnitude and 2 deg direction when
  gamma0 equals the plant lag, and the calibration recovers a perturbed
  lag within 0.01 rad;
* reachable moment set: grid-sampled (tau_y, tau_z) achievability matches
  the analytic box (SEA) and diamond (CEA) with zero misclassifications;
* numerical hygiene: free-body energy drift < 1e-6 over 10 s, quaternion
  norm error < 1e-12 per step, and byte-identical traces for identical
  config and seed.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .allocation import CyclicCommand, Wrench, forward_map, mix, moments_achievable
from .control import ControlGains, Setpoint
from .dynamics import SimState, integrate_step
from .propulsion import (RotorState, averaged_rotor_wrench, calibrate_gamma0,
                         cyclic_throttle, revolution_average, rotor_step,
                         speed_map, spin_sign)
from .quat import GRAVITY
from .scenarios import format_trace_csv, hover_state
from .simulation import Simulation
from .vehicle import VehicleParams


def sample_unsaturated_wrench(rng, p: VehicleParams) -> Wrench:
    """Random wrench strictly inside the unsaturated region of both mixers."""
    c_base = rng.uniform(0.2, 0.8)
    c_diff = rng.uniform(-0.05, 0.05)
    f_t = 2.0 * p.k_thrust * c_base
    tau_x = 2.0 * p.arm_l * p.k_thrust * c_diff
    # keep the CEA diamond and the SEA amplitude clamp comfortably unsaturated
    ty_lim = 0.45 * 2.0 * p.k_ep * p.servo_limit
    tz_lim = 0.45 * 2.0 * p.k_elevon * p.servo_limit
    amp_lim = 0.9 * 2.0 * p.k_swash * min(c_base - abs(c_diff),
                                          1.0 - c_base - abs(c_diff))
    tau_y = rng.uniform(-1.0, 1.0) * min(ty_lim, amp_lim)
    tau_z = rng.uniform(-tz_lim, tz_lim)
    return Wrench(f_t, np.array([tau_x, tau_y, tau_z]))


def check_mixer_roundtrip(p: VehicleParams, n: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        w = sample_unsaturated_wrench(rng, p)
        for variant in ("sea", "cea"):
            cmd, report = mix(w, variant, p)
            if report.any:
                return False, f"unexpected saturation flag for {variant}"
            back = forward_map(cmd, variant, p)
            err = max(abs(back.f_t - w.f_t), float(np.abs(back.tau - w.tau).max()))
            worst = max(worst, err)
    return worst < 1e-9, f"max component error {worst:.3e}"


def check_cyclic_identities(p: VehicleParams, n_grid: int = 4096):
    theta = (np.arange(n_grid) + 0.5) * (2.0 * math.pi / n_grid)
    worst_mean = worst_amp = 0.0
    for c, a, phi in ((0.4, 0.1, 0.0), (0.5, 0.3, 1.2), (0.3, 0.25, -2.0),
                      (0.7, 0.2, math.pi)):
        for motor in (1, 2):
            cmd = CyclicCommand(c, a, phi)
            u = np.array([cyclic_throttle(cmd, t, motor, p.gamma0) for t in theta])
            worst_mean = max(worst_mean, abs(u.mean() - c))
            harm = 2.0 * math.hypot(float(u @ np.cos(theta)) / n_grid,
                                    float(u @ np.sin(theta)) / n_grid)
            worst_amp = max(worst_amp, abs(harm - a))
    ok = worst_mean < 1e-9 and worst_amp < 1e-9
    return ok, f"mean err {worst_mean:.2e}, amplitude err {worst_amp:.2e}"


def check_cross_fidelity(p: VehicleParams):
    worst_mag = worst_dir = 0.0
    for motor in (1, 2):
        for phi in (0.0, math.pi, 0.8):
            cmd = CyclicCommand(0.4, 0.1, phi)
            thrust, tau = revolution_average(cmd, motor, p)
            ref = averaged_rotor_wrench(cmd, motor, p)
            arm = -p.arm_l if motor == 1 else p.arm_l
            m = tau - np.array([arm * thrust, 0.0, 0.0])
            m_ref = ref.tau - np.array([arm * ref.f_t, 0.0, 0.0])
            mag = np.hypot(m[0], m[1])
            mag_ref = np.hypot(m_ref[0], m_ref[1])
            worst_mag = max(worst_mag, abs(mag - mag_ref) / mag_ref)
            d = math.atan2(-m[0], m[1]) - math.atan2(-m_ref[0], m_ref[1])
            worst_dir = max(worst_dir, abs(math.remainder(d, 2.0 * math.pi)))
    # calibration must recover a perturbed plant lag
    p_cal = replace(p, gamma_phys=0.35, gamma0=0.0)
    cmd = CyclicCommand(0.4, 0.1, 0.0)
    worst_cal = 0.0
    for motor in (1, 2):
        s = spin_sign(motor, p_cal)
        st = RotorState(motor_index=motor, thrust_actual=p_cal.k_thrust * 0.4,
                        omega=s * speed_map(0.4, p_cal))
        st.enc_omega = st.omega
        trace = []
        for _ in range(12000):
            st, w = rotor_step(st, cmd, 5.0e-5, p_cal)
            arm = -p_cal.arm_l if motor == 1 else p_cal.arm_l
            m = w.tau - np.array([arm * w.f_t, 0.0, 0.0])
            trace.append((st.theta, m[:2]))
        est = calibrate_gamma0(trace, phi=0.0, gamma0_commanded=0.0, rotor_dir=s)
        worst_cal = max(worst_cal, abs(est - 0.35))
    ok = (worst_mag < 0.02 and worst_dir < math.radians(2.0) and worst_cal < 0.01)
    return ok, (f"mag err {100*worst_mag:.2f}%, dir err "
                f"{math.degrees(worst_dir):.3f} deg, calib err {worst_cal:.4f} rad")


def check_reachable_sets(p: VehicleParams, n: int = 100):
    c_hover = p.hover_throttle()
    f_t = p.hover_thrust()
    bad = 0
    # distinct per-axis offsets keep every grid point off the set boundaries
    # (a common offset cancels on the diamond edge in mixed-sign quadrants)
    grid_y = np.linspace(-1.1, 1.1, n) + 0.00137
    grid_z = np.linspace(-1.1, 1.1, n) + 0.00059
    ty_box = 2.0 * p.k_swash * min(c_hover, 1.0 - c_hover)
    ty_dia = 2.0 * p.k_ep * p.servo_limit
    tz_max = 2.0 * p.k_elevon * p.servo_limit
    for variant, ty_scale in (("sea", ty_box), ("cea", ty_dia)):
        for uy in grid_y:
            for uz in grid_z:
                ty, tz = uy * ty_scale, uz * tz_max
                want = moments_achievable(ty, tz, variant, p, c_hover)
                cmd, report = mix(Wrench(f_t, np.array([0.0, ty, tz])), variant, p)
                back = forward_map(cmd, variant, p)
                got = (abs(back.tau[1] - ty) < 1e-9 and abs(back.tau[2] - tz) < 1e-9
                       and not report.any)
                bad += want != got
    return bad == 0, f"{bad} misclassified of {2 * n * n}"


def check_numerics(p: VehicleParams, gains: ControlGains | None = None):
    # free tumbling body under gravity: energy conserved
    state = SimState(position=np.array([0.0, 0.0, 100.0]),
                     velocity=np.array([1.0, -2.0, 3.0]),
                     omega=np.array([1.0, -2.0, 0.7]))
    inertia = p.inertia_diag

    def energy(s):
        return (0.5 * p.mass * float(s.velocity @ s.velocity)
                + p.mass * GRAVITY * s.position[2]
                + 0.5 * float(s.omega @ (inertia * s.omega)))

    e0 = energy(state)
    gravity = np.array([0.0, 0.0, -p.mass * GRAVITY])
    worst_norm = 0.0
    for _ in range(10000):
        state = integrate_step(state, np.zeros(3), gravity, 1.0e-3, p)
        worst_norm = max(worst_norm, abs(np.linalg.norm(state.attitude) - 1.0))
    drift = abs(energy(state) - e0) / abs(e0)

    # determinism: identical config and seed give identical trace bytes
    gains = gains or ControlGains()
    sp = Setpoint(mode="position", position_d=(0.0, 0.0, 1.0))
    texts = []
    for _ in range(2):
        sim = Simulation(p, gains, "sea", "averaged", setpoint_fn=lambda t: sp,
                         initial_state=hover_state(p, (0.0, 0.0, 1.0)), seed=7)
        texts.append(format_trace_csv(sim.run(1.0)))
    ok = drift < 1e-6 and worst_norm < 1e-12 and texts[0] == texts[1]
    return ok, (f"energy drift {drift:.2e}, quat norm err {worst_norm:.2e}, "
                f"traces {'identical' if texts[0] == texts[1] else 'DIFFER'}")


CHECKS = [
    ("mixer_roundtrip", check_mixer_roundtrip),
    ("cyclic_identities", check_cyclic_identities),
    ("cross_fidelity", check_cross_fidelity),
    ("reachable_sets", check_reachable_sets),
    ("numerics", check_numerics),
]


def run_selftest(p: VehicleParams | None = None, verbose_print=print):
    """Run every property; returns (all_ok, results dict)."""
    p = p or VehicleParams()
    results = {}
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn(p)
        ok = bool(ok)
        results[name] = {"pass": ok, "detail": detail}
        all_ok = all_ok and ok
        if verbose_print:
            verbose_print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok, results
