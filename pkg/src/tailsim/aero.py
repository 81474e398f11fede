"""Elevon moments and flat-plate wing aerodynamics.

Elevons deflect the propeller slipstream: their moment gain scales with the
local propwash dynamic pressure, normalized so that k_elevon is the gain at
hover propwash, and with a ground-effect factor that collapses toward
eta_min as the elevons approach the ground (the mechanism that degrades
conventional elevon pitch control during take-off; rotor thrust is left
untouched on purpose).

Common-mode deflection produces yaw (tau_z = k_elevon * (d1 + d2), the
mirrored-servo convention of the mixer) and differential deflection
produces pitch (tau_y = k_ep * (d1 - d2)) plus the matching small body-x
force with moment arm elevon_arm.

The wing is a flat-plate strip model: n_strips spanwise strips, each seeing
its own local airflow, with normal-force coefficient 2*sin(a)*cos(a) and
drag 2*sin(a)^2 + c_d0.  Strip forces times their position arms produce the
gust-induced moments; a jet covering one half-span yields yaw and roll
naturally.  Strips sit wing_z_offset aft of the CoM so face-on wind also
pitches the vehicle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quat import quat_rotate_inv, quat_to_matrix
from .vehicle import VehicleParams


@dataclass
class SurfaceState:
    """One elevon: actual deflection after servo dynamics, and its command."""
    delta: float = 0.0
    delta_cmd: float = 0.0


def propwash_speed(rotor_thrust: float, p: VehicleParams) -> float:
    """Momentum-theory induced velocity behind one rotor."""
    t = max(rotor_thrust, 0.0)
    return math.sqrt(t / (2.0 * p.air_density * p.rotor_disk_area))


def ground_effect_factor(height: float, p: VehicleParams) -> float:
    """Elevon effectiveness in [eta_min, 1], linear up to ground_effect_height."""
    if p.ground_effect_height <= 0.0:
        return 1.0
    frac = min(1.0, max(0.0, height) / p.ground_effect_height)
    return p.eta_min + (1.0 - p.eta_min) * frac


def elevon_wrench(surfaces, propwash, height: float, p: VehicleParams):
    """Moments and body force from both elevons.

    surfaces: (SurfaceState, SurfaceState); propwash: per-side speeds (m/s).
    Returns (tau_body, force_body).
    """
    v_hover = p.propwash_hover()
    eta = ground_effect_factor(height, p)
    # (v/v_hover)^2 capped at 1: k_elevon is the constant gain at and above
    # the hover operating point; below it the slipstream starves the surface
    e1 = eta * min(1.0, (propwash[0] / v_hover) ** 2)
    e2 = eta * min(1.0, (propwash[1] / v_hover) ** 2)
    d1 = surfaces[0].delta * e1
    d2 = surfaces[1].delta * e2
    tau = np.array([0.0, p.k_ep * (d1 - d2), p.k_elevon * (d1 + d2)])
    force = np.array([p.k_efx * (d1 - d2), 0.0, 0.0])
    return tau, force


def strip_positions(p: VehicleParams) -> np.ndarray:
    """Body-frame centers of the spanwise wing strips, (n_strips, 3)."""
    n = p.n_strips
    y = p.wing_span * ((np.arange(n) + 0.5) / n - 0.5)
    pos = np.zeros((n, 3))
    pos[:, 1] = y
    pos[:, 2] = p.wing_z_offset
    return pos


def wing_wrench(velocity_world, wind_world, q, p: VehicleParams,
                omega_body=None):
    """Flat-plate strip wrench from relative airflow.

    velocity_world: CoM velocity (world frame).  wind_world: either one
    world-frame wind vector applied to every strip or an (n_strips, 3)
    array of per-strip winds (an unbalanced field needs the latter).
    omega_body adds the rigid-rotation component of each strip's velocity,
    giving aerodynamic damping.  Returns (tau_body, force_body).
    """
    if p.wing_area <= 0.0 or p.n_strips == 0:
        return np.zeros(3), np.zeros(3)
    R = quat_to_matrix(q)
    v_b = R.T @ np.asarray(velocity_world, dtype=float)
    wind = np.asarray(wind_world, dtype=float)
    pos = strip_positions(p)
    n = p.n_strips
    if wind.ndim == 1:
        wind_b = np.broadcast_to(R.T @ wind, (n, 3))
    else:
        wind_b = wind @ R  # row-wise R.T @ wind_i
    u = v_b[None, :] - wind_b
    if omega_body is not None:
        u = u + np.cross(np.broadcast_to(omega_body, (n, 3)), pos)

    speed = np.linalg.norm(u, axis=1)
    live = speed > 1e-9
    if not live.any():
        return np.zeros(3), np.zeros(3)

    area = p.wing_area / n
    qdyn = 0.5 * p.air_density * speed[live] ** 2 * area
    uhat = u[live] / speed[live, None]
    sin_a = uhat[:, 0]                       # flow component along wing normal
    cos_a = np.sqrt(np.maximum(0.0, 1.0 - sin_a ** 2))
    c_n = 2.0 * np.abs(sin_a) * cos_a
    c_d = 2.0 * sin_a ** 2 + p.c_d0

    force = -(qdyn * c_d)[:, None] * uhat    # drag opposes motion through air
    # lift: along -sign(u_x) * x_hat projected normal to the flow
    lvec = np.zeros_like(uhat)
    lvec[:, 0] = -np.sign(sin_a)
    lvec -= (np.einsum("ij,ij->i", lvec, uhat))[:, None] * uhat
    lnorm = np.linalg.norm(lvec, axis=1)
    ok = lnorm > 1e-9
    lvec[ok] /= lnorm[ok, None]
    lvec[~ok] = 0.0
    force += (qdyn * c_n)[:, None] * lvec

    tau = np.cross(pos[live], force).sum(axis=0)
    return tau, force.sum(axis=0)
