"""Physical parameters, frames and unit conventions, config load/validate.

All internal quantities are SI (m, kg, s, rad, N); degrees appear only in
the config file (``*_deg`` keys).  The default set reproduces the test
vehicle: 2.25 kg total mass, 1.07 m span, thrust-weight ratio 2.5 at full
throttle on two rotors.  Quantities the vehicle datasheet does not pin
(inertia, moment gains ``k_swash``/``k_elevon``, elevon geometry, fan jet
shape) are unvalidated defaults chosen for realistic hover authority; every
SEA-vs-CEA comparison in this package runs both variants with identical
values, so conclusions are ordering-based, not absolute.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import InfeasibleError, ParseError, ValidationError
from .quat import GRAVITY

THROTTLE_RANGE = (0.0, 1.0)

#: Frame conventions (see also quat module docstring).  Body x is
#: perpendicular to the main-wing plane, y runs along the wing toward motor 1,
#: z points to the tail; thrust acts along -z.  Motor 1 sits at body
#: (0, +arm_l, 0), motor 2 at (0, -arm_l, 0).  The rotor angle theta_i is
#: measured from the body x axis to the positive blade, with the same
#: convention for both motors regardless of spin direction.
FRAMES_DOC = "body: x wing-normal, y span, z tail; world: ENU, gravity -z"


@dataclass(frozen=True)
class VehicleParams:
    # [vehicle]
    mass: float = 2.25                      # kg
    inertia: tuple = (0.055, 0.020, 0.065)  # kg m^2, body diagonal
    arm_l: float = 0.28                     # m, body-y CoM -> motor
    k_thrust: float = 27.590625             # N per unit throttle
    k_swash: float = 0.9                    # N m per unit sinusoid amplitude
    k_elevon: float = 1.2                   # N m per rad servo angle
    gamma0: float = 0.35                    # rad, calibrated phase advance
    servo_limit: float = math.radians(12.0)
    servo_rate_limit: float = math.radians(400.0)
    servo_tau: float = 0.025                # s, servo small-signal tracking lag
    motor_tau: float = 0.005                # s, throttle -> thrust lag
    wing_area: float = 0.35                 # m^2
    wing_span: float = 1.07                 # m
    elevon_area: float = 0.02               # m^2 each
    elevon_arm: float = 0.25                # m, body-z CoM -> elevon CP
    rotor_disk_area: float = 0.049          # m^2 each
    ground_effect_height: float = 0.35      # m
    air_density: float = 1.225              # kg m^-3
    # [propulsion]
    rotor_dir: tuple = (1, -1)              # +1 CCW / -1 CW seen from thrust side
    gamma_phys: float = 0.35                # rad, true hinge lag in the plant
    k_lat: float = 1.8                      # N m per unit throttle ripple (2*k_swash)
    omega_hover: float = 520.0              # rad/s spin rate at hover throttle
    omega_max: float = 1200.0               # rad/s
    encoder_rate_hz: float = 910.0
    # [aero]
    n_strips: int = 8
    c_d0: float = 0.35
    eta_min: float = 0.05                   # ground-effect effectiveness floor
    k_efx: float = 1.2 / 0.25               # N per rad, elevon body-x force gain
    wing_z_offset: float = -0.02            # m, wing CP offset from CoM along body z
    # [allocation]
    k_ep: float = 1.2                       # N m per rad, elevon pitch gain (CEA)
    saturation_priority: str = "thrust_first"
    # [dynamics]
    gear_height: float = 0.12               # m, CoM height when resting on gear
    trim_tau_y: float = 0.12                # N m, constant canard trim moment

    def hover_thrust(self):
        return self.mass * GRAVITY

    def hover_throttle(self):
        return self.hover_thrust() / (2.0 * self.k_thrust)

    def propwash_hover(self):
        """Per-rotor induced velocity at hover, the elevon gain reference."""
        t_rotor = 0.5 * self.hover_thrust()
        return math.sqrt(t_rotor / (2.0 * self.air_density * self.rotor_disk_area))

    @property
    def inertia_diag(self):
        return np.array(self.inertia)


def validate_params(p: VehicleParams) -> VehicleParams:
    """Check every invariant; raises ValidationError naming the first bad field."""
    if not p.mass > 0.0:
        raise ValidationError("mass", "must be > 0")
    if not all(i > 0.0 for i in p.inertia):
        raise ValidationError("inertia", "all entries must be > 0")
    if len(p.inertia) != 3:
        raise ValidationError("inertia", "needs xx, yy, zz")
    if not p.arm_l > 0.0:
        raise ValidationError("arm_l", "must be > 0")
    for name in ("k_thrust", "k_swash", "k_elevon", "k_ep"):
        if not getattr(p, name) > 0.0:
            raise ValidationError(name, "must be > 0")
    if 2.0 * p.k_thrust < p.mass * GRAVITY:
        raise ValidationError("k_thrust", "2*k_thrust must lift the vehicle")
    if not p.servo_limit > 0.0:
        raise ValidationError("servo_limit_deg", "must be > 0")
    if not p.servo_rate_limit > 0.0:
        raise ValidationError("servo_rate_deg_s", "must be > 0")
    if not (-math.pi < p.gamma0 <= math.pi):
        raise ValidationError("gamma0", "must lie in (-pi, pi]")
    if p.motor_tau < 0.0:
        raise ValidationError("motor_tau_s", "must be >= 0")
    if p.servo_tau < 0.0:
        raise ValidationError("servo_tau_s", "must be >= 0")
    for name in ("air_density", "rotor_disk_area"):
        if not getattr(p, name) > 0.0:
            raise ValidationError(name, "must be > 0")
    for name in ("wing_area", "wing_span", "elevon_area", "elevon_arm",
                 "ground_effect_height", "gear_height"):
        if getattr(p, name) < 0.0:
            raise ValidationError(name, "must be >= 0")
    if not (0.0 <= p.eta_min <= 1.0):
        raise ValidationError("eta_min", "must lie in [0, 1]")
    if p.n_strips < 2:
        raise ValidationError("n_strips", "need at least 2 strips")
    if any(d not in (1, -1) for d in p.rotor_dir) or len(p.rotor_dir) != 2:
        raise ValidationError("rotor_dir", "signs must be +1 or -1")
    if not (0.0 < p.omega_hover <= p.omega_max):
        raise ValidationError("omega_hover", "must lie in (0, omega_max]")
    if p.encoder_rate_hz <= 0.0:
        raise ValidationError("encoder_rate_hz", "must be > 0")
    if p.saturation_priority != "thrust_first":
        raise ValidationError("saturation_priority", "only 'thrust_first' is implemented")
    return p


# config key <-> dataclass field, with unit conversion where they differ
_FLOAT = float
_INT = int
_SIGN = int

_SCHEMA = {
    "vehicle": {
        "mass": ("mass", _FLOAT, None),
        "inertia_xx": ("inertia", _FLOAT, 0),
        "inertia_yy": ("inertia", _FLOAT, 1),
        "inertia_zz": ("inertia", _FLOAT, 2),
        "arm_l": ("arm_l", _FLOAT, None),
        "k_thrust": ("k_thrust", _FLOAT, None),
        "k_swash": ("k_swash", _FLOAT, None),
        "k_elevon": ("k_elevon", _FLOAT, None),
        "gamma0": ("gamma0", _FLOAT, None),
        "servo_limit_deg": ("servo_limit", "deg", None),
        "servo_rate_deg_s": ("servo_rate_limit", "deg", None),
        "motor_tau_s": ("motor_tau", _FLOAT, None),
        "wing_area": ("wing_area", _FLOAT, None),
        "wing_span": ("wing_span", _FLOAT, None),
        "elevon_area": ("elevon_area", _FLOAT, None),
        "elevon_arm": ("elevon_arm", _FLOAT, None),
        "rotor_disk_area": ("rotor_disk_area", _FLOAT, None),
        "ground_effect_height": ("ground_effect_height", _FLOAT, None),
        "air_density": ("air_density", _FLOAT, None),
    },
    "propulsion": {
        "rotor_dir_1": ("rotor_dir", _SIGN, 0),
        "rotor_dir_2": ("rotor_dir", _SIGN, 1),
        "gamma_phys": ("gamma_phys", _FLOAT, None),
        "k_lat": ("k_lat", _FLOAT, None),
        "omega_hover": ("omega_hover", _FLOAT, None),
        "omega_max": ("omega_max", _FLOAT, None),
        "encoder_rate_hz": ("encoder_rate_hz", _FLOAT, None),
    },
    "aero": {
        "n_strips": ("n_strips", _INT, None),
        "c_d0": ("c_d0", _FLOAT, None),
        "eta_min": ("eta_min", _FLOAT, None),
        "k_efx": ("k_efx", _FLOAT, None),
        "wing_z_offset": ("wing_z_offset", _FLOAT, None),
    },
    "allocation": {
        "k_ep": ("k_ep", _FLOAT, None),
        "saturation_priority": ("saturation_priority", str, None),
    },
    "dynamics": {
        "gear_height": ("gear_height", _FLOAT, None),
        "trim_tau_y": ("trim_tau_y", _FLOAT, None),
        "servo_tau_s": ("servo_tau", _FLOAT, None),
    },
}

# sections owned by other modules; load_params tolerates them
_FOREIGN_SECTIONS = ("control", "sim", "wind", "scenario")


def _read_ini(text):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ParseError(str(e)) from None
    return cp


def load_params(config_text: str = "") -> VehicleParams:
    """Build a validated VehicleParams from INI-style config text.

    Empty text returns the full default set.  Unknown sections or keys are
    a ValidationError (typo protection); sections owned by other modules
    ([control], [sim], [wind], [scenario]) pass through untouched.
    """
    cp = _read_ini(config_text)
    values = {f.name: getattr(VehicleParams(), f.name) for f in fields(VehicleParams)}
    values["inertia"] = list(values["inertia"])
    values["rotor_dir"] = list(values["rotor_dir"])

    for section in cp.sections():
        if section in _FOREIGN_SECTIONS:
            continue
        if section not in _SCHEMA:
            raise ValidationError(section, "unknown config section")
        schema = _SCHEMA[section]
        for key, raw in cp.items(section):
            if key not in schema:
                raise ValidationError(f"{section}.{key}", "unknown config key")
            field, conv, idx = schema[key]
            try:
                if conv == "deg":
                    val = math.radians(float(raw))
                elif conv is _SIGN:
                    val = int(float(raw))
                elif conv is _INT:
                    val = int(raw)
                elif conv is str:
                    val = raw.strip()
                else:
                    val = float(raw)
            except ValueError:
                raise ParseError(f"{section}.{key}: cannot parse {raw!r}") from None
            if idx is None:
                values[field] = val
            else:
                values[field][idx] = val

    values["inertia"] = tuple(values["inertia"])
    values["rotor_dir"] = tuple(values["rotor_dir"])
    # pin deg-carried fields to the serialize/parse fixed point so that
    # load_params(serialize_params(p)) == p holds exactly
    for f in ("servo_limit", "servo_rate_limit"):
        values[f] = math.radians(float(repr(math.degrees(values[f]))))
    # dependent defaults follow their parents unless explicitly set
    if not cp.has_option("propulsion", "k_lat"):
        values["k_lat"] = 2.0 * values["k_swash"]
    if not cp.has_option("allocation", "k_ep"):
        values["k_ep"] = values["k_elevon"]
    if not cp.has_option("aero", "k_efx"):
        values["k_efx"] = values["k_ep"] / values["elevon_arm"] if values["elevon_arm"] > 0 else 0.0
    return validate_params(VehicleParams(**values))


def serialize_params(p: VehicleParams) -> str:
    """Emit config text that round-trips through load_params exactly."""
    cp = configparser.ConfigParser()
    for section, schema in _SCHEMA.items():
        cp.add_section(section)
        for key, (field, conv, idx) in schema.items():
            val = getattr(p, field)
            if idx is not None:
                val = val[idx]
            if conv == "deg":
                val = math.degrees(val)
            cp.set(section, key, repr(val) if isinstance(val, float) else str(val))
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def hover_setpoint(p: VehicleParams):
    """Steady-state hover demand: total thrust (N) and per-motor throttle."""
    thrust = p.hover_thrust()
    throttle = thrust / (2.0 * p.k_thrust)
    if throttle >= THROTTLE_RANGE[1]:
        raise InfeasibleError(f"hover throttle {throttle:.3f} >= 1")
    return thrust, throttle
