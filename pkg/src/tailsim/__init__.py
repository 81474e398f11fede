"""tailsim: 6-DOF tail-sitter VTOL simulator and control-allocation library.

Compares swashplateless-elevon actuation (SEA: rotors carry pitch via
cyclic speed modulation, elevons carry yaw alone) against conventional
elevon actuation (CEA: elevons carry pitch and yaw together) in scripted
take-off, trajectory-tracking, disturbance-rejection and transition
scenarios with quantitative error reports.
"""

__version__ = "0.1.0"

from .allocation import (ActuatorCommand, CyclicCommand, SaturationReport,
                         Wrench, cea_mix, forward_map, mix, sea_mix)
from .aero import (SurfaceState, elevon_wrench, ground_effect_factor,
                   propwash_speed, wing_wrench)
from .control import CascadeController, ControlGains, Setpoint
from .dynamics import SimState, ground_contact, integrate_step, total_wrench
from .environment import Fan, WindField, wind_at
from .propulsion import (RotorState, averaged_rotor_wrench, calibrate_gamma0,
                         cyclic_throttle, rotor_step)
from .simulation import Simulation, TRACE_COLUMNS
from .vehicle import VehicleParams, hover_setpoint, load_params, serialize_params
