import math

import numpy as np
import pytest

from tailsim.allocation import (ActuatorCommand, CyclicCommand, Wrench,
                                cea_mix, forward_map, mix, moment_envelope,
                                moments_achievable, sea_mix)
from tailsim.selftest import check_reachable_sets, sample_unsaturated_wrench
from tailsim.vehicle import VehicleParams

P = VehicleParams()
HOVER = Wrench(P.hover_thrust(), np.zeros(3))


def wrench(f_t, tx=0.0, ty=0.0, tz=0.0):
    return Wrench(f_t, np.array([tx, ty, tz]))


# ------------------------------------------------------------------ SEA mix

def test_sea_hover_allocation():
    cmd, report = sea_mix(HOVER, P)
    m1, m2 = cmd.cyclic
    assert m1.c_nominal == pytest.approx(0.40, abs=1e-12)
    assert m2.c_nominal == pytest.approx(0.40, abs=1e-12)
    assert m1.amplitude == 0.0 and m2.amplitude == 0.0
    assert cmd.servo == (0.0, 0.0)
    assert not report.any


def test_sea_pitch_allocation():
    cmd, _ = sea_mix(wrench(P.hover_thrust(), ty=0.18), P)
    for m in cmd.cyclic:
        assert m.amplitude == pytest.approx(0.1, abs=1e-12)   # 0.18 / (2*0.9)
        assert m.phi == 0.0
    cmd, _ = sea_mix(wrench(P.hover_thrust(), ty=-0.18), P)
    for m in cmd.cyclic:
        assert m.amplitude == pytest.approx(0.1, abs=1e-12)
        assert m.phi == math.pi


def test_sea_yaw_clamp_sets_flag_and_achieved():
    demand = 2.0 * P.k_elevon * P.servo_limit * 1.5
    cmd, report = sea_mix(wrench(P.hover_thrust(), tz=demand), P)
    assert cmd.servo[0] == pytest.approx(P.servo_limit)
    assert report.d1 and report.d2
    assert report.achieved.tau[2] == pytest.approx(2.0 * P.k_elevon * P.servo_limit)


def test_sea_amplitude_clamped_by_throttle_margin():
    # low thrust -> little amplitude headroom
    cmd, report = sea_mix(wrench(0.2 * P.k_thrust, ty=0.5), P)
    m1 = cmd.cyclic[0]
    assert m1.amplitude == pytest.approx(min(m1.c_nominal, 1 - m1.c_nominal))
    assert report.a1 and report.a2


# ------------------------------------------------------------------ CEA mix

def test_cea_pure_yaw_matches_sea():
    w = wrench(P.hover_thrust(), tz=0.3)
    sea_cmd, _ = sea_mix(w, P)
    cea_cmd, _ = cea_mix(w, P)
    assert cea_cmd.servo == sea_cmd.servo
    assert cea_cmd.cyclic[0].amplitude == 0.0


def test_cea_pure_pitch_antisymmetric_no_net_yaw():
    cmd, _ = cea_mix(wrench(P.hover_thrust(), ty=0.2), P)
    assert cmd.servo[0] == pytest.approx(-cmd.servo[1])
    back = forward_map(cmd, "cea", P)
    assert back.tau[2] == pytest.approx(0.0, abs=1e-12)
    assert back.tau[1] == pytest.approx(0.2, abs=1e-12)


def test_cea_combined_overload_loses_both_axes():
    # pitch and yaw each demanding 0.6 * servo range -> servo 1 wants 1.2x
    ty = 0.6 * P.servo_limit * 2.0 * P.k_ep
    tz = 0.6 * P.servo_limit * 2.0 * P.k_elevon
    cmd, report = cea_mix(wrench(P.hover_thrust(), ty=ty, tz=tz), P)
    assert cmd.servo[0] == pytest.approx(P.servo_limit)   # clamped from 1.2x
    assert report.d1 and not report.d2
    back = report.achieved
    assert back.tau[1] < ty - 1e-9 and back.tau[2] < tz - 1e-9


def test_cea_forward_rows():
    cmd = ActuatorCommand(cyclic=(CyclicCommand(0.4), CyclicCommand(0.4)),
                          servo=(0.1, -0.1))
    w = forward_map(cmd, "cea", P)
    assert w.tau[1] == pytest.approx(0.24, abs=1e-12)     # k_ep * 0.2
    assert w.tau[2] == pytest.approx(0.0, abs=1e-12)
    assert w.f_t == pytest.approx(22.0725, abs=1e-9)
    assert w.tau[0] == pytest.approx(0.0, abs=1e-12)


# ------------------------------------------------------------- round trips

@pytest.mark.parametrize("variant", ["sea", "cea"])
def test_roundtrip_thousand_random_wrenches(variant):
    rng = np.random.default_rng(17)
    for _ in range(1000):
        w = sample_unsaturated_wrench(rng, P)
        cmd, report = mix(w, variant, P)
        assert not report.any
        back = forward_map(cmd, variant, P)
        assert abs(back.f_t - w.f_t) < 1e-9
        assert np.abs(back.tau - w.tau).max() < 1e-9


# ---------------------------------------------------------------- coupling

def test_sea_decoupling_sparsity():
    w0 = wrench(P.hover_thrust(), ty=0.1, tz=0.1)
    c0, _ = sea_mix(w0, P)
    c1, _ = sea_mix(wrench(P.hover_thrust(), ty=0.25, tz=0.1), P)
    assert c1.servo == c0.servo                                # yaw untouched
    assert c1.cyclic[0].c_nominal == c0.cyclic[0].c_nominal
    assert c1.cyclic[0].amplitude != c0.cyclic[0].amplitude
    c2, _ = sea_mix(wrench(P.hover_thrust(), ty=0.1, tz=0.25), P)
    assert c2.cyclic == c0.cyclic                              # pitch untouched
    assert c2.servo != c0.servo


def test_cea_coupling_diamond_vs_sea_box():
    ok, detail = check_reachable_sets(P)
    assert ok, detail


def test_envelope_kinds():
    ty, tz, kind = moment_envelope("sea", P, 0.4)
    assert kind == "box"
    assert ty == pytest.approx(2 * P.k_swash * 0.4)
    ty, tz, kind = moment_envelope("cea", P, 0.4)
    assert kind == "diamond"
    assert ty == pytest.approx(2 * P.k_ep * P.servo_limit)
    # the diamond loses the box's corner
    corner = (0.6 * 2 * P.k_ep * P.servo_limit, 0.6 * 2 * P.k_elevon * P.servo_limit)
    assert not moments_achievable(*corner, "cea", P, 0.4)


def test_saturation_monotone_under_demand_scaling():
    rng = np.random.default_rng(5)
    for _ in range(200):
        w = sample_unsaturated_wrench(rng, P)
        tau = w.tau * 3.0       # push outside
        for variant in ("sea", "cea"):
            flags = []
            for lam in (1.0, 1.5, 2.5, 4.0):
                _, rep = mix(Wrench(w.f_t, tau * lam), variant, P)
                flags.append((rep.c1, rep.c2, rep.a1, rep.a2, rep.d1, rep.d2))
            for a, b in zip(flags, flags[1:]):
                for fa, fb in zip(a, b):
                    assert fb >= fa     # scaling up never clears a flag
