"""Scripted flight experiments and their error metrics.

Each runner builds the wind field and setpoint schedule for one experiment,
runs a deterministic closed-loop simulation, and reduces the trace to
median / 25th / 75th-percentile / max absolute errors (nearest-rank
percentiles, angles wrapped to (-pi, pi] before taking magnitudes).

The five experiments:

* take-off from ground or a 1 m pedestal, attitude-mode throttle ramp or
  position-mode commanded ascent; near the ground the elevons lose
  effectiveness, which is what separates the actuation variants;
* constant-height 2 m x 1 m figure-of-eight, four cycles (first and last
  stretched for smooth accel/decel), yaw commanded along the horizontal
  velocity direction;
* hover under a balanced two-fan gust hitting the full wing face-on;
* 1 m position steps with an always-on fan loading a single half-span
  (along the airflow, or orthogonal to it);
* transition to -65 deg pitch and fixed-wing flight on the wing's lift.

Paired SEA/CEA comparisons must run from identical configs differing only
in the variant key; the compare front-end enforces that by mutating a copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import RunConfig
from .control import Setpoint
from .dynamics import SimState
from .environment import Fan, WindField
from .errors import ConfigError, EmptyTraceError
from .propulsion import RotorState, speed_map, spin_sign
from .quat import GRAVITY, Q_HOVER, euler_to_quat, wrap_angle
from .simulation import CONTROL_DT, TRACE_COLUMNS, Simulation, trace_column
from .vehicle import VehicleParams


# ---------------------------------------------------------------- metrics

def nearest_rank(sorted_values, q: float) -> float:
    """Nearest-rank percentile of an ascending array (q in (0, 1])."""
    n = len(sorted_values)
    if n == 0:
        raise EmptyTraceError("empty series")
    idx = max(1, math.ceil(q * n))
    return float(sorted_values[idx - 1])


@dataclass
class ErrorStats:
    median: float
    q25: float
    q75: float
    max: float


def compute_metrics(trace_values, reference, angular: bool = False) -> ErrorStats:
    """Absolute-error quartiles of a traced channel against its reference."""
    values = np.asarray(trace_values, dtype=float)
    if values.size == 0:
        raise EmptyTraceError("empty trace")
    err = values - np.asarray(reference, dtype=float)
    if angular:
        err = wrap_angle(err)
    err = np.sort(np.abs(err))
    return ErrorStats(median=nearest_rank(err, 0.5), q25=nearest_rank(err, 0.25),
                      q75=nearest_rank(err, 0.75), max=float(err[-1]))


def _stats_dict(prefix: str, stats: ErrorStats, scale: float = 1.0) -> dict:
    return {f"{prefix}_median": stats.median * scale,
            f"{prefix}_q25": stats.q25 * scale,
            f"{prefix}_q75": stats.q75 * scale,
            f"{prefix}_max": stats.max * scale}


@dataclass
class ScenarioReport:
    scenario: str
    variant: str
    trace: np.ndarray                 # (n, len(TRACE_COLUMNS))
    stats: dict = field(default_factory=dict)      # flat key -> float
    headline: dict = field(default_factory=dict)   # the scenario's key numbers
    saturation: dict = field(default_factory=dict)

    def column(self, name):
        return trace_column(self.trace, name)


# ----------------------------------------------------------- run helpers

def hover_state(p: VehicleParams, position, yaw: float = 0.0) -> SimState:
    """Airborne equilibrium state at a position: hover attitude and thrust."""
    rotors = []
    for i in (1, 2):
        w = spin_sign(i, p) * speed_map(p.hover_throttle(), p)
        rotors.append(RotorState(motor_index=i, omega=w, enc_omega=w,
                                 thrust_actual=0.5 * p.hover_thrust()))
    return SimState(position=np.array(position, dtype=float),
                    attitude=euler_to_quat(0.0, 0.0, yaw),
                    rotors=tuple(rotors))


def _simulate(cfg: RunConfig, variant, setpoint_fn, wind=None,
              platform_height=0.0, initial_state=None, duration=10.0,
              sim_box=None):
    if cfg.sim.duration_s is not None:
        duration = cfg.sim.duration_s
    sim = Simulation(cfg.params, cfg.gains, variant=variant,
                     fidelity=cfg.sim.fidelity,
                     wind=wind if wind is not None else cfg.wind,
                     setpoint_fn=setpoint_fn, platform_height=platform_height,
                     seed=cfg.sim.seed, initial_state=initial_state)
    if sim_box is not None:
        sim_box["sim"] = sim  # setpoint closures that read vehicle state
    if initial_state is not None:
        _trim_airborne_start(sim, cfg.params, variant)
    trace = sim.run(duration)
    return sim, trace


def _trim_airborne_start(sim: Simulation, p: VehicleParams, variant: str):
    """Put an airborne start into trimmed-hover equilibrium.

    The vehicle has been hovering before the scenario window: the pitch-trim
    integrator is charged, the surfaces already sit at their trim deflection,
    and the velocity integrator carries whatever cancels the elevons'
    reaction force (nonzero under CEA, where the deflection holds the trim).
    """
    from .aero import SurfaceState, elevon_wrench
    from .allocation import Wrench as _Wrench, mix as _mix
    from .quat import quat_rotate

    sim.controller.preload_pitch_trim(-p.trim_tau_y)
    cmd, _ = _mix(_Wrench(p.hover_thrust(), np.array([0.0, -p.trim_tau_y, 0.0])),
                  variant, p)
    surfaces = (SurfaceState(delta=cmd.servo[0], delta_cmd=cmd.servo[0]),
                SurfaceState(delta=cmd.servo[1], delta_cmd=cmd.servo[1]))
    sim.servo_held = cmd.servo
    state = sim.state
    sim.state = SimState(position=state.position, velocity=state.velocity,
                         attitude=state.attitude, omega=state.omega,
                         rotors=state.rotors, surfaces=surfaces,
                         time=state.time)
    wash = p.propwash_hover()
    _, force_b = elevon_wrench(surfaces, (wash, wash), state.position[2], p)
    force_w = quat_rotate(state.attitude, force_b)
    gi = np.asarray(sim.controller.g.vel_i)
    with np.errstate(divide="ignore", invalid="ignore"):
        preload = np.where(gi > 0.0, -force_w / (p.mass * np.maximum(gi, 1e-12)), 0.0)
    preload[2] = 0.0
    sim.controller.vel_int = preload


def _saturation_dict(sim: Simulation) -> dict:
    acc = sim.saturation
    return {"sat_duty_any": acc.duty("any"), "sat_duty_servo": acc.duty("servo"),
            "sat_duty_amplitude": acc.duty("amplitude"),
            "sat_duty_throttle": acc.duty("throttle")}


def _smoothstep(u: float) -> float:
    u = min(1.0, max(0.0, u))
    return u * u * (3.0 - 2.0 * u)


# ------------------------------------------------------------- scenarios

def run_takeoff(variant: str, cfg: RunConfig | None = None,
                platform: str | None = None, control: str | None = None) -> ScenarioReport:
    """Take-off from rest; reports max pitch error (and x error in position mode)."""
    cfg = cfg or RunConfig()
    sc = cfg.scenario if cfg.scenario.get("name") == "takeoff" else {}
    platform = platform or sc.get("platform", "ground")
    control = control or sc.get("control", "attitude")
    if platform not in ("ground", "pedestal"):
        raise ConfigError(f"unknown platform {platform!r}")
    if control not in ("attitude", "position"):
        raise ConfigError(f"unknown take-off control mode {control!r}")
    p = cfg.params
    platform_height = 0.0 if platform == "ground" else 1.0
    z0 = platform_height + p.gear_height

    if control == "attitude":
        ramp_s = sc.get("ramp_s", 3.0)
        f_max = 2.0 * p.k_thrust * sc.get("ramp_throttle", 0.46)
        duration = sc.get("duration_s", 6.0)
        q_up = Q_HOVER.copy()

        def setpoint_fn(t):
            f = f_max * min(t / ramp_s, 1.0)
            return Setpoint(mode="attitude", attitude_d=q_up, f_t_d=f)
    else:
        ascent_m = sc.get("ascent_m", 1.0)
        ascent_s = sc.get("ascent_s", 4.0)
        duration = sc.get("duration_s", 8.0)

        def setpoint_fn(t):
            u = (t - 1.0) / ascent_s
            z_d = z0 + ascent_m * _smoothstep(u)
            if 0.0 <= u <= 1.0:
                du = 6.0 * u * (1.0 - u) / ascent_s
                v_ff = (0.0, 0.0, ascent_m * du)
            else:
                v_ff = (0.0, 0.0, 0.0)
            return Setpoint(mode="position", position_d=(0.0, 0.0, z_d),
                            velocity_d=v_ff, yaw_d=0.0)

    sim, trace = _simulate(cfg, variant, setpoint_fn,
                           wind=WindField(), platform_height=platform_height,
                           duration=duration)
    pitch = compute_metrics(trace_column(trace, "pitch"),
                            trace_column(trace, "pitch_d"), angular=True)
    stats = _stats_dict("pitch_err_rad", pitch)
    headline = {"max_pitch_err_deg": math.degrees(pitch.max)}
    if control == "position":
        x = compute_metrics(trace_column(trace, "px"), 0.0)
        stats.update(_stats_dict("x_err_m", x))
        headline["max_x_err_m"] = x.max
    stats.update(_saturation_dict(sim))
    return ScenarioReport("takeoff", variant, trace, stats, headline,
                          _saturation_dict(sim))


def _fig8_phase(t: float, period: float, slow_period: float, cycles: int):
    """Trajectory phase (cycles completed, fractional) and its rate.

    First and last cycles run over slow_period with a cubic ease so the
    reference starts and ends at rest; middle cycles are uniform.
    """
    t1 = slow_period
    t_mid = (cycles - 2) * period
    if t <= 0.0:
        return 0.0, 0.0
    if t < t1:
        tau = t / t1
        s = 1.5 * tau * tau - 0.5 * tau ** 3
        ds = (3.0 * tau - 1.5 * tau * tau) / t1
        return s, ds
    if t < t1 + t_mid:
        return 1.0 + (t - t1) / period, 1.0 / period
    t_end = t1 + t_mid + slow_period
    if t < t_end:
        tau = (t_end - t) / slow_period
        s = 1.5 * tau * tau - 0.5 * tau ** 3
        ds = (3.0 * tau - 1.5 * tau * tau) / slow_period
        return cycles - s, ds
    return float(cycles), 0.0


def fig8_reference(t: float, length=2.0, width=1.0, period=5.0,
                   slow_period=7.5, cycles=4, height=1.5):
    """Reference position, velocity and acceleration of the figure-of-eight."""
    s, ds = _fig8_phase(t, period, slow_period, cycles)
    ax, ay = 0.5 * length, 0.5 * width
    wx, wy = 2.0 * math.pi, 4.0 * math.pi
    pos = (ax * math.sin(wx * s), ay * math.sin(wy * s), height)
    vel = (ax * wx * math.cos(wx * s) * ds, ay * wy * math.cos(wy * s) * ds, 0.0)
    acc = (-ax * wx * wx * math.sin(wx * s) * ds * ds,
           -ay * wy * wy * math.sin(wy * s) * ds * ds, 0.0)
    return pos, vel, acc


def run_fig8(variant: str, cfg: RunConfig | None = None) -> ScenarioReport:
    """Figure-of-eight tracking with velocity-aligned yaw."""
    cfg = cfg or RunConfig()
    sc = cfg.scenario if cfg.scenario.get("name") == "fig8" else {}
    length = sc.get("length", 2.0)
    width = sc.get("width", 1.0)
    period = sc.get("period_s", 5.0)
    slow = sc.get("slow_period_s", 7.5)
    cycles = int(sc.get("cycles", 4))
    height = sc.get("height", 1.5)
    leadin = sc.get("leadin_s", 2.0)
    total = leadin + 2.0 * slow + (cycles - 2) * period

    yaw_hold = {"yaw": math.atan2(width * 2.0, length)}  # initial motion direction
    sim_box = {}

    def setpoint_fn(t):
        pos, vel, acc = fig8_reference(t - leadin, length, width, period,
                                       slow, cycles, height)
        # yaw follows the vehicle's horizontal velocity direction (held when
        # too slow for atan2 to mean anything); tracking errors feed back
        # into the yaw demand, which is what loads the attitude actuators
        v = sim_box["sim"].state.velocity
        if math.hypot(v[0], v[1]) >= 0.2:
            yaw_hold["yaw"] = math.atan2(v[1], v[0])
        return Setpoint(mode="position", position_d=pos, velocity_d=vel,
                        acceleration_d=acc, yaw_d=yaw_hold["yaw"])

    start = hover_state(cfg.params, (0.0, 0.0, height),
                        yaw=yaw_hold["yaw"])
    sim, trace = _simulate(cfg, variant, setpoint_fn, wind=WindField(),
                           initial_state=start, duration=total, sim_box=sim_box)

    mask = trace_column(trace, "t") >= leadin
    ref = np.array([fig8_reference(t - leadin, length, width, period, slow,
                                   cycles, height)[0]
                    for t in trace_column(trace, "t")[mask]])
    pos = trace[mask, 1:4]
    pos_err_norm = np.linalg.norm(pos - ref, axis=1)
    pos_stats = compute_metrics(pos_err_norm, 0.0)
    yaw_stats = compute_metrics(trace_column(trace, "yaw")[mask],
                                trace_column(trace, "yaw_d")[mask], angular=True)
    stats = {**_stats_dict("pos_err_m", pos_stats),
             **_stats_dict("yaw_err_rad", yaw_stats), **_saturation_dict(sim)}
    headline = {"pos_err_median_cm": 100.0 * pos_stats.median,
                "pos_err_max_cm": 100.0 * pos_stats.max,
                "yaw_err_median_deg": math.degrees(yaw_stats.median),
                "yaw_err_max_deg": math.degrees(yaw_stats.max)}
    return ScenarioReport("fig8", variant, trace, stats, headline,
                          _saturation_dict(sim))


def _balanced_fans(v_ref, distance, height, t_on, t_off, imbalance=0.08):
    """Two parallel fans covering the full span.

    Real fan pairs are never perfectly matched; `imbalance` is the
    fractional flow difference between the two units (default 8%), small
    enough to keep the field balanced in the experimental sense but enough
    to exercise the yaw channel the way a physical rig does.
    """
    sched = ((t_on, t_off),) if t_on is not None else ()
    mk = lambda y, v: Fan(position=(distance, y, height), axis=(-1.0, 0.0, 0.0),
                          v_ref=v, d_ref=distance, jet_radius=0.3,
                          decay_exp=1.0, schedule=sched)
    return WindField(kind="fan", fans=(mk(0.28, v_ref * (1.0 + 0.5 * imbalance)),
                                       mk(-0.28, v_ref * (1.0 - 0.5 * imbalance))))


def run_hover_gust(variant: str, cfg: RunConfig | None = None) -> ScenarioReport:
    """Hover while a balanced two-fan gust loads the whole wing face-on."""
    cfg = cfg or RunConfig()
    sc = cfg.scenario if cfg.scenario.get("name") == "hover_gust" else {}
    v_ref = sc.get("v_ref", 4.5)
    dist = sc.get("fan_distance", 1.0)
    height = sc.get("height", 1.0)
    t_on, t_off = sc.get("t_on", 2.0), sc.get("t_off", 7.0)
    duration = sc.get("duration_s", 10.0)

    wind = _balanced_fans(v_ref, dist, height, t_on, t_off,
                          imbalance=sc.get("imbalance", 0.08))
    setpoint = Setpoint(mode="position", position_d=(0.0, 0.0, height))
    start = hover_state(cfg.params, (0.0, 0.0, height))
    sim, trace = _simulate(cfg, variant, lambda t: setpoint, wind=wind,
                           initial_state=start, duration=duration)

    x_stats = compute_metrics(trace_column(trace, "px"), 0.0)
    pitch_stats = compute_metrics(trace_column(trace, "pitch"),
                                  trace_column(trace, "pitch_d"), angular=True)
    stats = {**_stats_dict("x_err_m", x_stats),
             **_stats_dict("pitch_err_rad", pitch_stats), **_saturation_dict(sim)}
    headline = {"x_err_median_cm": 100.0 * x_stats.median,
                "x_err_max_cm": 100.0 * x_stats.max,
                "pitch_err_median_deg": math.degrees(pitch_stats.median),
                "pitch_err_max_deg": math.degrees(pitch_stats.max)}
    return ScenarioReport("hover_gust", variant, trace, stats, headline,
                          _saturation_dict(sim))


def run_step_disturbance(variant: str, axis: str = "x",
                         cfg: RunConfig | None = None) -> ScenarioReport:
    """1 m position steps under a single-fan half-span disturbance.

    axis 'x': step along the airflow (away from the fan, then back).
    axis 'y': step orthogonal to the airflow (out of the jet, then back).
    """
    if axis not in ("x", "y"):
        raise ConfigError(f"step axis must be x or y, got {axis!r}")
    cfg = cfg or RunConfig()
    name = f"step_{axis}"
    sc = cfg.scenario if cfg.scenario.get("name") == name else {}
    v_ref = sc.get("v_ref", 3.5)
    dist = sc.get("fan_distance", 1.0)
    step_m = sc.get("step_m", 1.0)
    t_step, t_return = sc.get("t_step", 3.0), sc.get("t_return", 8.0)
    duration = sc.get("duration_s", 13.0)
    height = 1.0

    fan = Fan(position=(dist, -0.3, height), axis=(-1.0, 0.0, 0.0),
              v_ref=v_ref, d_ref=dist, jet_radius=0.17, decay_exp=1.0)
    wind = WindField(kind="fan", fans=(fan,))
    away = (-step_m, 0.0, height) if axis == "x" else (0.0, step_m, height)

    def setpoint_fn(t):
        if t < t_step or t >= t_return:
            pos = (0.0, 0.0, height)
        else:
            pos = away
        return Setpoint(mode="position", position_d=pos, yaw_d=0.0)

    start = hover_state(cfg.params, (0.0, 0.0, height))
    sim, trace = _simulate(cfg, variant, setpoint_fn, wind=wind,
                           initial_state=start, duration=duration)

    stats = {}
    headline = {}
    for ch, ref_ch in (("roll", "roll_d"), ("pitch", "pitch_d"), ("yaw", "yaw_d")):
        st = compute_metrics(trace_column(trace, ch), trace_column(trace, ref_ch),
                             angular=True)
        stats.update(_stats_dict(f"{ch}_err_rad", st))
        headline[f"max_{ch}_err_deg"] = math.degrees(st.max)
    ret = trace_column(trace, "t") >= t_return
    yaw_ret = compute_metrics(trace_column(trace, "yaw")[ret],
                              trace_column(trace, "yaw_d")[ret], angular=True)
    stats.update(_stats_dict("yaw_err_return_rad", yaw_ret))
    headline["max_yaw_err_return_deg"] = math.degrees(yaw_ret.max)
    stats.update(_saturation_dict(sim))
    headline["servo_sat_duty"] = sim.saturation.duty("servo")
    return ScenarioReport(name, variant, trace, stats, headline,
                          _saturation_dict(sim))


def run_transition(variant: str, cfg: RunConfig | None = None) -> ScenarioReport:
    """Pitch over to fixed-wing attitude and accelerate on wing lift."""
    cfg = cfg or RunConfig()
    sc = cfg.scenario if cfg.scenario.get("name") == "transition" else {}
    pitch_fw = math.radians(sc.get("pitch_deg", -65.0))
    ramp_s = sc.get("ramp_s", 2.0)
    hold_s = sc.get("hold_s", 10.0)
    throttle = sc.get("throttle", 0.40)
    start_alt = sc.get("start_alt", 20.0)
    p = cfg.params
    if not sc.get("wing_enabled", True):
        p = replace(p, wing_area=0.0)
        cfg = replace(cfg, params=p)
    t0, t1 = 1.0, 1.0 + ramp_s
    duration = t1 + hold_s
    hover_f = p.hover_thrust()
    trans_f = 2.0 * p.k_thrust * throttle

    def setpoint_fn(t):
        if t < t0:
            pitch_d, f = 0.0, hover_f
        elif t < t1:
            u = (t - t0) / ramp_s
            pitch_d = pitch_fw * u
            f = hover_f + (trans_f - hover_f) * u
        else:
            pitch_d, f = pitch_fw, trans_f
        return Setpoint(mode="attitude", attitude_d=euler_to_quat(0.0, pitch_d, 0.0),
                        f_t_d=f)

    start = hover_state(cfg.params, (0.0, 0.0, start_alt))
    sim, trace = _simulate(cfg, variant, setpoint_fn, wind=WindField(),
                           initial_state=start, duration=duration)

    t = trace_column(trace, "t")
    pitch = trace_column(trace, "pitch")
    hold = t >= t1
    tail = t >= duration - 2.0
    pitch_deg = np.degrees(pitch)
    overshoot = max(0.0, float(-(pitch_deg.min()) - abs(math.degrees(pitch_fw))))
    steady_err = float(np.mean(np.abs(pitch_deg[tail] - math.degrees(pitch_fw))))
    speed = np.linalg.norm(trace[:, 4:7], axis=1)
    final_speed = float(np.mean(speed[t >= duration - 0.5]))
    roll_stats = compute_metrics(trace_column(trace, "roll")[hold], 0.0, angular=True)
    yaw_stats = compute_metrics(trace_column(trace, "yaw")[hold], 0.0, angular=True)
    alt_drop = float(start_alt - trace_column(trace, "pz").min())

    stats = {"pitch_overshoot_deg": overshoot, "pitch_steady_err_deg": steady_err,
             "final_airspeed_m_s": final_speed, "altitude_drop_m": alt_drop,
             **_stats_dict("roll_err_rad", roll_stats),
             **_stats_dict("yaw_err_rad", yaw_stats), **_saturation_dict(sim)}
    headline = {"pitch_overshoot_deg": overshoot, "pitch_steady_err_deg": steady_err,
                "final_airspeed_m_s": final_speed,
                "max_roll_err_deg": math.degrees(roll_stats.max),
                "max_yaw_err_deg": math.degrees(yaw_stats.max)}
    return ScenarioReport("transition", variant, trace, stats, headline,
                          _saturation_dict(sim))


def run_hover(variant: str, cfg: RunConfig | None = None) -> ScenarioReport:
    """Plain undisturbed hover; the null-condition baseline."""
    cfg = cfg or RunConfig()
    sc = cfg.scenario if cfg.scenario.get("name") == "hover" else {}
    height = sc.get("height", 1.0)
    duration = sc.get("duration_s", 5.0)
    setpoint = Setpoint(mode="position", position_d=(0.0, 0.0, height))
    start = hover_state(cfg.params, (0.0, 0.0, height))
    sim, trace = _simulate(cfg, variant, lambda t: setpoint, wind=WindField(),
                           initial_state=start, duration=duration)
    pos_err = np.linalg.norm(trace[:, 1:4] - np.array([0.0, 0.0, height]), axis=1)
    pos_stats = compute_metrics(pos_err, 0.0)
    pitch_stats = compute_metrics(trace_column(trace, "pitch"),
                                  trace_column(trace, "pitch_d"), angular=True)
    stats = {**_stats_dict("pos_err_m", pos_stats),
             **_stats_dict("pitch_err_rad", pitch_stats), **_saturation_dict(sim)}
    headline = {"pos_err_max_cm": 100.0 * pos_stats.max,
                "pitch_err_max_deg": math.degrees(pitch_stats.max)}
    return ScenarioReport("hover", variant, trace, stats, headline,
                          _saturation_dict(sim))


RUNNERS = {
    "hover": run_hover,
    "fig8": run_fig8,
    "hover_gust": run_hover_gust,
    "transition": run_transition,
}


def run_scenario(name: str, variant: str, cfg: RunConfig | None = None) -> ScenarioReport:
    """Dispatch a scenario by config name."""
    if name == "takeoff":
        return run_takeoff(variant, cfg)
    if name == "step_x":
        return run_step_disturbance(variant, "x", cfg)
    if name == "step_y":
        return run_step_disturbance(variant, "y", cfg)
    if name in RUNNERS:
        return RUNNERS[name](variant, cfg)
    raise ConfigError(f"unknown scenario {name!r}")


# ------------------------------------------------------------- reporting

def format_trace_csv(trace: np.ndarray) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for row in trace:
        lines.append(",".join("%.10g" % v for v in row))
    return "\n".join(lines) + "\n"


def format_stats(stats: dict) -> str:
    return "".join(f"{k}={'%.10g' % v if isinstance(v, float) else v}\n"
                   for k, v in stats.items())
