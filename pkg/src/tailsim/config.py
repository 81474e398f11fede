"""Run configuration: full INI schema, resolved defaults, validation.

A run config is flat key=value INI text.  Physical parameters live in the
[vehicle]/[propulsion]/[aero]/[allocation]/[dynamics] sections handled by
the vehicle module; this module adds [control] (cascade gains), [sim]
(variant, fidelity, physics step, seed, duration), [wind] (fan field) and
[scenario] (scenario name plus its knobs).  Unknown sections or keys are
rejected everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from . import vehicle as vehicle_mod
from .control import ControlGains
from .environment import Fan, WindField
from .errors import ConfigError, ParseError, ValidationError
from .vehicle import VehicleParams, load_params

SCENARIOS = ("takeoff", "fig8", "hover_gust", "step_x", "step_y", "transition", "hover")

_AXES = ("x", "y", "z")


@dataclass
class SimSettings:
    variant: str = "sea"
    fidelity: str = "averaged"
    dt_s: float = 1.0e-3          # physics substep; control tick is 1 kHz
    seed: int = 0
    duration_s: float | None = None  # scenario default when None


@dataclass
class RunConfig:
    params: VehicleParams = field(default_factory=VehicleParams)
    gains: ControlGains = field(default_factory=ControlGains)
    sim: SimSettings = field(default_factory=SimSettings)
    wind: WindField | None = None     # None: scenario builds its own
    scenario: dict = field(default_factory=lambda: {"name": "hover"})


def _triple(cp, section, prefix, default):
    out = list(default)
    for i, ax in enumerate(_AXES):
        key = f"{prefix}_{ax}"
        if cp.has_option(section, key):
            out[i] = float(cp.get(section, key))
    return tuple(out)


_CONTROL_KEYS = (
    ["pos_p_" + a for a in _AXES] + ["vel_max"]
    + [f"vel_{k}_{a}" for k in "pid" for a in _AXES] + ["vel_int_limit"]
    + ["att_p_" + a for a in _AXES]
    + [f"rate_{k}_{a}" for k in "pid" for a in _AXES] + ["rate_int_limit"]
    + ["max_tilt_deg", "max_rate_dps"] + ["tau_limit_" + a for a in _AXES]
)

_SIM_KEYS = ("variant", "fidelity", "dt_s", "seed", "duration_s")

_WIND_KEYS = ("kind", "uniform_x", "uniform_y", "uniform_z")
_FAN_KEYS = ("x", "y", "z", "axis_x", "axis_y", "axis_z", "v_ref", "d_ref",
             "radius", "decay", "t_on", "t_off")

_SCENARIO_KEYS = {
    "hover": ("duration_s", "height"),
    "takeoff": ("platform", "control", "ramp_s", "ramp_throttle", "ascent_m",
                "ascent_s", "duration_s"),
    "fig8": ("length", "width", "period_s", "slow_period_s", "cycles",
             "height", "leadin_s"),
    "hover_gust": ("v_ref", "fan_distance", "t_on", "t_off", "duration_s", "height", "imbalance"),
    "step_x": ("v_ref", "fan_distance", "step_m", "t_step", "t_return", "duration_s"),
    "step_y": ("v_ref", "fan_distance", "step_m", "t_step", "t_return", "duration_s"),
    "transition": ("pitch_deg", "ramp_s", "hold_s", "throttle", "start_alt",
                   "wing_enabled"),
}


def parse_gains(cp) -> ControlGains:
    g = ControlGains()
    if not cp.has_section("control"):
        return g
    for key in cp.options("control"):
        if key not in _CONTROL_KEYS:
            raise ValidationError(f"control.{key}", "unknown config key")
    sec = "control"
    kw = dict(
        pos_p=_triple(cp, sec, "pos_p", g.pos_p),
        vel_p=_triple(cp, sec, "vel_p", g.vel_p),
        vel_i=_triple(cp, sec, "vel_i", g.vel_i),
        vel_d=_triple(cp, sec, "vel_d", g.vel_d),
        att_p=_triple(cp, sec, "att_p", g.att_p),
        rate_p=_triple(cp, sec, "rate_p", g.rate_p),
        rate_i=_triple(cp, sec, "rate_i", g.rate_i),
        rate_d=_triple(cp, sec, "rate_d", g.rate_d),
        tau_limit=_triple(cp, sec, "tau_limit", g.tau_limit),
    )
    if cp.has_option(sec, "vel_max"):
        kw["vel_max"] = float(cp.get(sec, "vel_max"))
    if cp.has_option(sec, "vel_int_limit"):
        kw["vel_int_limit"] = float(cp.get(sec, "vel_int_limit"))
    if cp.has_option(sec, "rate_int_limit"):
        kw["rate_int_limit"] = float(cp.get(sec, "rate_int_limit"))
    if cp.has_option(sec, "max_tilt_deg"):
        kw["max_tilt"] = math.radians(float(cp.get(sec, "max_tilt_deg")))
    if cp.has_option(sec, "max_rate_dps"):
        kw["max_rate"] = math.radians(float(cp.get(sec, "max_rate_dps")))
    return ControlGains(**kw)


def parse_wind(cp) -> WindField | None:
    if not cp.has_section("wind"):
        return None
    fans = {}
    kind = "none"
    uniform = [0.0, 0.0, 0.0]
    for key, raw in cp.items("wind"):
        if key == "kind":
            kind = raw.strip()
            if kind not in ("none", "uniform", "fan"):
                raise ValidationError("wind.kind", f"unknown kind {kind!r}")
        elif key.startswith("uniform_") and key in _WIND_KEYS:
            uniform["xyz".index(key[-1])] = float(raw)
        elif key.startswith("fan"):
            head, _, sub = key.partition("_")
            try:
                idx = int(head[3:])
            except ValueError:
                raise ValidationError(f"wind.{key}", "unknown config key") from None
            if sub not in _FAN_KEYS:
                raise ValidationError(f"wind.{key}", "unknown config key")
            fans.setdefault(idx, {})[sub] = float(raw)
        else:
            raise ValidationError(f"wind.{key}", "unknown config key")
    fan_list = []
    for idx in sorted(fans):
        d = fans[idx]
        schedule = ()
        if "t_on" in d or "t_off" in d:
            schedule = ((d.get("t_on", 0.0), d.get("t_off", math.inf)),)
        fan_list.append(Fan(
            position=(d.get("x", 1.0), d.get("y", 0.0), d.get("z", 1.0)),
            axis=(d.get("axis_x", -1.0), d.get("axis_y", 0.0), d.get("axis_z", 0.0)),
            v_ref=d.get("v_ref", 4.5), d_ref=d.get("d_ref", 1.0),
            jet_radius=d.get("radius", 0.6), decay_exp=d.get("decay", 1.0),
            schedule=schedule))
    return WindField(kind=kind, uniform=tuple(uniform), fans=tuple(fan_list))


def parse_sim(cp) -> SimSettings:
    s = SimSettings()
    if not cp.has_section("sim"):
        return s
    for key in cp.options("sim"):
        if key not in _SIM_KEYS:
            raise ValidationError(f"sim.{key}", "unknown config key")
    if cp.has_option("sim", "variant"):
        s.variant = cp.get("sim", "variant").strip()
        if s.variant not in ("sea", "cea"):
            raise ValidationError("sim.variant", "must be sea or cea")
    if cp.has_option("sim", "fidelity"):
        s.fidelity = cp.get("sim", "fidelity").strip()
        if s.fidelity not in ("averaged", "cyclic"):
            raise ValidationError("sim.fidelity", "must be averaged or cyclic")
    if cp.has_option("sim", "dt_s"):
        s.dt_s = float(cp.get("sim", "dt_s"))
    else:
        s.dt_s = 1.0e-3 if s.fidelity == "averaged" else 2.0e-4
    if cp.has_option("sim", "seed"):
        s.seed = int(cp.get("sim", "seed"))
    if cp.has_option("sim", "duration_s"):
        s.duration_s = float(cp.get("sim", "duration_s"))
    return s


def parse_scenario(cp) -> dict:
    sc = {"name": "hover"}
    if not cp.has_section("scenario"):
        return sc
    items = dict(cp.items("scenario"))
    name = items.pop("name", "hover").strip()
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r} (known: {', '.join(SCENARIOS)})")
    sc["name"] = name
    allowed = _SCENARIO_KEYS[name]
    for key, raw in items.items():
        if key not in allowed:
            raise ValidationError(f"scenario.{key}", f"unknown key for scenario {name}")
        if key in ("platform", "control"):
            sc[key] = raw.strip()
        elif key in ("cycles",):
            sc[key] = int(raw)
        elif key in ("wing_enabled",):
            sc[key] = raw.strip().lower() in ("1", "true", "yes")
        else:
            sc[key] = float(raw)
    if sc.get("platform", "ground") not in ("ground", "pedestal"):
        raise ValidationError("scenario.platform", "must be ground or pedestal")
    if sc.get("control", "attitude") not in ("attitude", "position"):
        raise ValidationError("scenario.control", "must be attitude or position")
    return sc


def parse_run_config(text: str = "") -> RunConfig:
    """Full config text -> RunConfig with every section validated."""
    cp = vehicle_mod._read_ini(text)
    known = set(vehicle_mod._SCHEMA) | {"control", "sim", "wind", "scenario"}
    for section in cp.sections():
        if section not in known:
            raise ValidationError(section, "unknown config section")
    params = load_params(text)
    return RunConfig(params=params, gains=parse_gains(cp), sim=parse_sim(cp),
                     wind=parse_wind(cp), scenario=parse_scenario(cp))


def default_config_text() -> str:
    """Full resolved default config (what `print-config` emits)."""
    lines = [vehicle_mod.serialize_params(VehicleParams()).rstrip(), ""]
    g = ControlGains()
    lines.append("[control]")
    for prefix, tup in (("pos_p", g.pos_p), ("vel_p", g.vel_p), ("vel_i", g.vel_i),
                        ("vel_d", g.vel_d), ("att_p", g.att_p), ("rate_p", g.rate_p),
                        ("rate_i", g.rate_i), ("rate_d", g.rate_d),
                        ("tau_limit", g.tau_limit)):
        for ax, v in zip(_AXES, tup):
            lines.append(f"{prefix}_{ax} = {v!r}")
    lines.append(f"vel_max = {g.vel_max!r}")
    lines.append(f"vel_int_limit = {g.vel_int_limit!r}")
    lines.append(f"rate_int_limit = {g.rate_int_limit!r}")
    lines.append(f"max_tilt_deg = {math.degrees(g.max_tilt)!r}")
    lines.append(f"max_rate_dps = {math.degrees(g.max_rate)!r}")
    lines.append("")
    s = SimSettings()
    lines.append("[sim]")
    lines.append(f"variant = {s.variant}")
    lines.append(f"fidelity = {s.fidelity}")
    lines.append(f"dt_s = {s.dt_s!r}")
    lines.append(f"seed = {s.seed}")
    lines.append("")
    lines.append("[wind]")
    lines.append("kind = none")
    lines.append("")
    lines.append("[scenario]")
    lines.append("name = hover")
    lines.append("")
    return "\n".join(lines)
