"""Wind fields: steady fan jets with schedules, plus uniform wind.

A fan jet is a cylinder around the fan axis.  On the axis the speed is
v_ref at the reference distance d_ref and decays as (d_ref/d)^decay_exp
beyond it (constant inside d_ref); radially the profile is flat over the
inner 80% of jet_radius and feathers to zero with a cosine ramp over the
outer 20%, keeping the field continuous in space.  Fans switch per their
on/off schedule through a first-order 0.3 s spin-up/down ramp, so the field
is piecewise-smooth in time.  A jet radius smaller than the half-span
aimed at one wing half realizes the unbalanced disturbance experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FAN_RAMP_TAU = 0.3  # s, fan spin-up/down time constant


@dataclass
class Fan:
    position: tuple = (1.0, 0.0, 1.0)   # m, world
    axis: tuple = (-1.0, 0.0, 0.0)      # unit vector, jet direction
    v_ref: float = 4.5                  # m/s at d_ref on the axis
    d_ref: float = 1.0                  # m
    jet_radius: float = 0.6             # m
    decay_exp: float = 1.0
    schedule: tuple = ()                # ((t_on, t_off), ...); empty = always on


@dataclass
class WindField:
    kind: str = "none"                  # none | uniform | fan
    uniform: tuple = (0.0, 0.0, 0.0)    # m/s, world (kind == uniform)
    fans: tuple = ()                    # kind == fan

    def __post_init__(self):
        for f in self.fans:
            if f.v_ref < 0.0 or f.d_ref <= 0.0 or f.jet_radius <= 0.0:
                raise ValueError("fan needs v_ref >= 0, d_ref > 0, jet_radius > 0")


def _fan_activation(fan: Fan, t: float) -> float:
    """Ramped on-fraction in [0, 1] for the fan's schedule at time t."""
    if not fan.schedule:
        return 1.0
    act = 0.0
    for t_on, t_off in fan.schedule:
        if t < t_on:
            continue
        rise = 1.0 - math.exp(-(t - t_on) / FAN_RAMP_TAU)
        if t < t_off:
            act = max(act, rise)
        else:
            at_off = 1.0 - math.exp(-(t_off - t_on) / FAN_RAMP_TAU)
            act = max(act, at_off * math.exp(-(t - t_off) / FAN_RAMP_TAU))
    return act


def wind_at(point, t: float, field: WindField) -> np.ndarray:
    """Wind velocity (m/s, world) at a world point and time."""
    if field.kind == "none":
        return np.zeros(3)
    if field.kind == "uniform":
        return np.asarray(field.uniform, dtype=float).copy()
    total = np.zeros(3)
    pt = np.asarray(point, dtype=float)
    for fan in field.fans:
        act = _fan_activation(fan, t)
        if act <= 0.0:
            continue
        axis = np.asarray(fan.axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        rel = pt - np.asarray(fan.position, dtype=float)
        d = float(rel @ axis)
        if d < 0.0:
            continue  # behind the fan
        radial = rel - d * axis
        r = float(np.linalg.norm(radial))
        if r >= fan.jet_radius:
            continue
        speed = fan.v_ref * (fan.d_ref / max(d, fan.d_ref)) ** fan.decay_exp
        edge = 0.8 * fan.jet_radius
        if r > edge:
            speed *= 0.5 * (1.0 + math.cos(math.pi * (r - edge) / (fan.jet_radius - edge)))
        total += act * speed * axis
    return total


def wind_at_points(points, t: float, field: WindField) -> np.ndarray:
    """wind_at over an (n, 3) array of points; returns (n, 3)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if field.kind == "none":
        return np.zeros_like(pts)
    if field.kind == "uniform":
        return np.broadcast_to(np.asarray(field.uniform, dtype=float), pts.shape).copy()
    return np.stack([wind_at(p, t, field) for p in pts])
