"""Control allocation: desired body wrench -> actuator commands.

Two mixers share thrust and roll handling (thrust split across both motors,
roll from differential throttle) and differ in how pitch and yaw are
produced:

* ``sea_mix`` routes pitch to the rotors' cyclic speed modulation
  (amplitude A, direction phi) and yaw to common-mode elevon deflection.
  Pitch and yaw actuators are independent, so the achievable (tau_y, tau_z)
  set is a full box.
* ``cea_mix`` blends pitch (differential) and yaw (common-mode) onto the
  same two elevons; both moments compete for the +/- servo_limit budget and
  the achievable set collapses to the diamond
  |tau_y/tau_y_max| + |tau_z/tau_z_max| <= 1.

Moment direction convention for the cyclic command: phi is measured in the
body x-y plane from the +y (pitch) axis, counterclockwise seen from +z, so
the averaged rotor moment vector is ``k_swash * A * (-sin phi, cos phi)``.
phi = 0 gives +tau_y, phi = pi gives -tau_y; the mixer folds the sign of the
demanded pitch moment into phi because the amplitude must stay nonnegative.

Saturation policy (``thrust_first``): nominal throttles are clamped to
[0, 1] first (altitude safety), then the sinusoid amplitude is clamped to
``min(C, 1 - C)`` so the total throttle stays in [0, 1], then servo angles
are clamped to ``+/- servo_limit``.  Every clamp that changed a value sets
a flag in the returned SaturationReport, and the achieved wrench is
recomputed through forward_map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .vehicle import VehicleParams


@dataclass
class Wrench:
    """Collective thrust magnitude along body -z plus body torque vector."""
    f_t: float = 0.0
    tau: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def as_vector(self):
        return np.array([self.f_t, self.tau[0], self.tau[1], self.tau[2]])


@dataclass
class CyclicCommand:
    """Per-motor cyclic throttle command (nominal C, amplitude A, direction phi)."""
    c_nominal: float = 0.0
    amplitude: float = 0.0
    phi: float = 0.0

    def is_valid(self):
        c, a = self.c_nominal, self.amplitude
        return 0.0 <= c <= 1.0 and a >= 0.0 and a <= min(c, 1.0 - c) + 1e-12


@dataclass
class ActuatorCommand:
    cyclic: tuple = (CyclicCommand(), CyclicCommand())  # motors 1, 2
    servo: tuple = (0.0, 0.0)                           # rad, elevons 1, 2


@dataclass
class SaturationReport:
    """Per-actuator clamp flags plus demanded/achieved wrench for one tick."""
    c1: bool = False
    c2: bool = False
    a1: bool = False
    a2: bool = False
    d1: bool = False
    d2: bool = False
    demanded: Wrench = field(default_factory=Wrench)
    achieved: Wrench = field(default_factory=Wrench)

    @property
    def any(self):
        return self.c1 or self.c2 or self.a1 or self.a2 or self.d1 or self.d2

    @property
    def servo_any(self):
        return self.d1 or self.d2

    def axis_flags(self, variant):
        """(roll, pitch, yaw) saturation seen by the rate-loop anti-windup.

        Under CEA the elevons carry both pitch and yaw, so a servo clamp
        freezes both integrators; that coupling is the point.
        """
        roll = self.c1 or self.c2
        servo = self.d1 or self.d2
        if variant == "sea":
            return roll, self.a1 or self.a2, servo
        return roll, servo, servo


class SaturationAccumulator:
    """Duty counters over control ticks (fraction of ticks with a clamp)."""

    def __init__(self):
        self.ticks = 0
        self.any_count = 0
        self.servo_count = 0
        self.amp_count = 0
        self.throttle_count = 0

    def add(self, report: SaturationReport):
        self.ticks += 1
        self.any_count += report.any
        self.servo_count += report.servo_any
        self.amp_count += report.a1 or report.a2
        self.throttle_count += report.c1 or report.c2

    def duty(self, which="any"):
        if self.ticks == 0:
            return 0.0
        n = {"any": self.any_count, "servo": self.servo_count,
             "amplitude": self.amp_count, "throttle": self.throttle_count}[which]
        return n / self.ticks


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def forward_map(cmd: ActuatorCommand, variant: str, p: VehicleParams) -> Wrench:
    """Actuator command -> body wrench under the linear actuator model.

    Inverse of the mixers inside the unsaturated region; used to account
    for the wrench actually achieved after clamping.
    """
    m1, m2 = cmd.cyclic
    d1, d2 = cmd.servo
    f_t = p.k_thrust * (m1.c_nominal + m2.c_nominal)
    tau_x = p.arm_l * p.k_thrust * (m2.c_nominal - m1.c_nominal)
    tau_z = p.k_elevon * (d1 + d2)
    if variant == "sea":
        tau_y = p.k_swash * (m1.amplitude * math.cos(m1.phi) +
                             m2.amplitude * math.cos(m2.phi))
        tau_x += -p.k_swash * (m1.amplitude * math.sin(m1.phi) +
                               m2.amplitude * math.sin(m2.phi))
    elif variant == "cea":
        tau_y = p.k_ep * (d1 - d2)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return Wrench(f_t, np.array([tau_x, tau_y, tau_z]))


def _mix_thrust_roll(desired: Wrench, p: VehicleParams):
    c_base = desired.f_t / (2.0 * p.k_thrust)
    c_diff = desired.tau[0] / (2.0 * p.arm_l * p.k_thrust)
    c1_raw = c_base - c_diff
    c2_raw = c_base + c_diff
    c1 = _clamp(c1_raw, 0.0, 1.0)
    c2 = _clamp(c2_raw, 0.0, 1.0)
    return c1, c2, (c1 != c1_raw), (c2 != c2_raw)


def sea_mix(desired: Wrench, p: VehicleParams):
    """Swashplateless-elevon allocation: rotors pitch, elevons yaw."""
    c1, c2, f_c1, f_c2 = _mix_thrust_roll(desired, p)

    a_raw = abs(desired.tau[1]) / (2.0 * p.k_swash)
    phi = 0.0 if desired.tau[1] >= 0.0 else math.pi
    a1 = _clamp(a_raw, 0.0, max(0.0, min(c1, 1.0 - c1)))
    a2 = _clamp(a_raw, 0.0, max(0.0, min(c2, 1.0 - c2)))

    d_raw = desired.tau[2] / (2.0 * p.k_elevon)
    d = _clamp(d_raw, -p.servo_limit, p.servo_limit)

    cmd = ActuatorCommand(
        cyclic=(CyclicCommand(c1, a1, phi), CyclicCommand(c2, a2, phi)),
        servo=(d, d))
    report = SaturationReport(
        c1=f_c1, c2=f_c2, a1=(a1 != a_raw), a2=(a2 != a_raw),
        d1=(d != d_raw), d2=(d != d_raw),
        demanded=desired, achieved=forward_map(cmd, "sea", p))
    return cmd, report


def cea_mix(desired: Wrench, p: VehicleParams):
    """Conventional elevon allocation: elevons carry pitch and yaw together."""
    c1, c2, f_c1, f_c2 = _mix_thrust_roll(desired, p)

    pitch_part = desired.tau[1] / (2.0 * p.k_ep)
    yaw_part = desired.tau[2] / (2.0 * p.k_elevon)
    d1_raw = pitch_part + yaw_part
    d2_raw = -pitch_part + yaw_part
    d1 = _clamp(d1_raw, -p.servo_limit, p.servo_limit)
    d2 = _clamp(d2_raw, -p.servo_limit, p.servo_limit)

    cmd = ActuatorCommand(
        cyclic=(CyclicCommand(c1, 0.0, 0.0), CyclicCommand(c2, 0.0, 0.0)),
        servo=(d1, d2))
    report = SaturationReport(
        c1=f_c1, c2=f_c2,
        d1=(d1 != d1_raw), d2=(d2 != d2_raw),
        demanded=desired, achieved=forward_map(cmd, "cea", p))
    return cmd, report


def mix(desired: Wrench, variant: str, p: VehicleParams):
    if variant == "sea":
        return sea_mix(desired, p)
    if variant == "cea":
        return cea_mix(desired, p)
    raise ValueError(f"unknown variant {variant!r}")


def moment_envelope(variant: str, p: VehicleParams, c_nominal: float):
    """Simultaneously achievable (tau_y, tau_z) limits at nominal throttle.

    Returns (tau_y_max, tau_z_max, kind) where kind is 'box' (independent
    axes, SEA) or 'diamond' (|ty/ty_max| + |tz/tz_max| <= 1, CEA).
    """
    tau_z_max = 2.0 * p.k_elevon * p.servo_limit
    if variant == "sea":
        amp = max(0.0, min(c_nominal, 1.0 - c_nominal))
        return 2.0 * p.k_swash * amp, tau_z_max, "box"
    return 2.0 * p.k_ep * p.servo_limit, tau_z_max, "diamond"


def moments_achievable(tau_y, tau_z, variant: str, p: VehicleParams,
                       c_nominal: float) -> bool:
    """Analytic membership test for the (tau_y, tau_z) reachable set."""
    ty_max, tz_max, kind = moment_envelope(variant, p, c_nominal)
    if kind == "box":
        return abs(tau_y) <= ty_max and abs(tau_z) <= tz_max
    return abs(tau_y) / ty_max + abs(tau_z) / tz_max <= 1.0
