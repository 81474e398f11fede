"""Closed-loop simulation scheduler.

One Simulation owns one vehicle, one controller, one mixer variant and one
wind field, and advances everything on a fixed 1 kHz control tick: rate and
attitude loops plus the mixer every tick, velocity loop at 250 Hz, position
loop at 100 Hz, servo commands held at 50 Hz.  At 'averaged' fidelity the
physics steps once per control tick (dt <= 1 ms); at 'cyclic' fidelity it
substeps at <= 0.2 ms so the per-revolution throttle modulation is resolved.

Runs are deterministic: fixed steps, no wall-clock, and the optional RNG is
seeded; identical configs produce bit-identical traces.

The trace records one row per control tick with the fixed column order

    t, px,py,pz, vx,vy,vz, qw,qx,qy,qz, roll,pitch,yaw, wx,wy,wz,
    px_d,py_d,pz_d, roll_d,pitch_d,yaw_d, C1,C2,A1,A2,phi1,phi2, d1,d2,
    sat_any, wind_x,wind_y,wind_z

(SI units, radians; sat_any is 0/1).
"""

from __future__ import annotations

import math

import numpy as np

from .allocation import SaturationAccumulator, mix
from .control import CascadeController, ControlGains, Setpoint
from .dynamics import SimState, ground_contact, integrate_step, total_wrench
from .environment import WindField
from .errors import ConfigError, SimulationFault
from .propulsion import RotorState, speed_map, spin_sign
from .quat import quat_to_euler
from .vehicle import VehicleParams

CONTROL_DT = 1.0e-3
SERVO_DIVIDER = 20          # 50 Hz servo command hold
CYCLIC_SUBSTEPS = 5         # 0.2 ms physics substeps in cyclic fidelity

TRACE_COLUMNS = [
    "t", "px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz",
    "roll", "pitch", "yaw", "wx", "wy", "wz",
    "px_d", "py_d", "pz_d", "roll_d", "pitch_d", "yaw_d",
    "C1", "C2", "A1", "A2", "phi1", "phi2", "d1", "d2",
    "sat_any", "wind_x", "wind_y", "wind_z",
]


class Simulation:
    """Single deterministic closed-loop run."""

    def __init__(self, params: VehicleParams, gains: ControlGains,
                 variant: str = "sea", fidelity: str = "averaged",
                 wind: WindField | None = None, setpoint_fn=None,
                 platform_height: float = 0.0, seed: int = 0,
                 initial_state: SimState | None = None):
        if variant not in ("sea", "cea"):
            raise ConfigError(f"unknown variant {variant!r}")
        if fidelity not in ("averaged", "cyclic"):
            raise ConfigError(f"unknown fidelity {fidelity!r}")
        self.p = params
        self.variant = variant
        self.fidelity = fidelity
        self.wind = wind if wind is not None else WindField()
        self.setpoint_fn = setpoint_fn or (lambda t: Setpoint())
        self.platform_height = platform_height
        self.rng = np.random.default_rng(seed)
        self.controller = CascadeController(params, gains, variant)
        self.saturation = SaturationAccumulator()
        self.state = initial_state if initial_state is not None else self.rest_state()
        self.last_report = None
        self.servo_held = (0.0, 0.0)
        self.tick = 0

    def rest_state(self) -> SimState:
        """Vehicle at rest on the gear, motors idle."""
        z = self.platform_height + self.p.gear_height
        rotors = []
        for i in (1, 2):
            w = spin_sign(i, self.p) * speed_map(0.0, self.p)
            rotors.append(RotorState(motor_index=i, omega=w, enc_omega=w))
        return SimState(position=np.array([0.0, 0.0, z]), rotors=tuple(rotors))

    def step(self):
        """One 1 kHz control tick plus its physics substeps; returns trace row."""
        try:
            return self._step_inner()
        except (ValueError, OverflowError, FloatingPointError) as e:
            # numerical explosion inside the physics counts as a fault
            raise SimulationFault(self.tick, f"numerics failed at tick "
                                             f"{self.tick}: {e}") from None

    def _step_inner(self):
        t = self.tick * CONTROL_DT
        state = self.state
        setpoint = self.setpoint_fn(t)

        desired = self.controller.update(state, setpoint, self.tick,
                                         CONTROL_DT, self.last_report)
        cmd, report = mix(desired, self.variant, self.p)
        self.last_report = report
        self.saturation.add(report)
        if self.tick % SERVO_DIVIDER == 0:
            self.servo_held = cmd.servo

        nsub = CYCLIC_SUBSTEPS if self.fidelity == "cyclic" else 1
        dt = CONTROL_DT / nsub
        diag = None
        for _ in range(nsub):
            rotors, surfaces, tau, force, diag = total_wrench(
                state, cmd, self.wind, self.fidelity, self.p, dt,
                servo_held=self.servo_held)
            state = integrate_step(state, tau, force, dt, self.p, self.fidelity)
            state = SimState(position=state.position, velocity=state.velocity,
                             attitude=state.attitude, omega=state.omega,
                             rotors=rotors, surfaces=surfaces, time=state.time)
            state = ground_contact(state, self.p, dt, self.platform_height,
                                   upward_force=force[2])

        self.state = state
        if not state.is_finite():
            raise SimulationFault(self.tick)

        row = self._trace_row(t, setpoint, cmd, report, diag)
        self.tick += 1
        return row

    def _trace_row(self, t, setpoint, cmd, report, diag):
        s = self.state
        roll, pitch, yaw = quat_to_euler(s.attitude)
        q_d = self.controller.q_d
        if q_d is None:
            roll_d = pitch_d = yaw_d = 0.0
        else:
            roll_d, pitch_d, yaw_d = quat_to_euler(q_d)
        if setpoint.mode == "position":
            p_d = setpoint.position_d
        else:
            p_d = (math.nan, math.nan, math.nan)
        m1, m2 = cmd.cyclic
        wind = diag["wind_com"] if diag else np.zeros(3)
        return [
            t, s.position[0], s.position[1], s.position[2],
            s.velocity[0], s.velocity[1], s.velocity[2],
            s.attitude[0], s.attitude[1], s.attitude[2], s.attitude[3],
            roll, pitch, yaw, s.omega[0], s.omega[1], s.omega[2],
            p_d[0], p_d[1], p_d[2], roll_d, pitch_d, yaw_d,
            m1.c_nominal, m2.c_nominal, m1.amplitude, m2.amplitude,
            m1.phi, m2.phi, cmd.servo[0], cmd.servo[1],
            1.0 if report.any else 0.0, wind[0], wind[1], wind[2],
        ]

    def run(self, duration: float) -> np.ndarray:
        """Run for `duration` seconds; returns the trace array (n, 35)."""
        n = int(round(duration / CONTROL_DT))
        out = np.empty((n, len(TRACE_COLUMNS)))
        for i in range(n):
            out[i] = self.step()
        return out


def trace_column(trace: np.ndarray, name: str) -> np.ndarray:
    return trace[:, TRACE_COLUMNS.index(name)]
