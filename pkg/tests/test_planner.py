import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from tvmpc.model import PendulumParams, natural_frequency
from tvmpc.planner import (
    GaitTiming, InputLimits, ScheduleExhausted, StepAdjustPolicy, VerticalParams,
    adjust_step, build_horizon, diagonal_schedule, vertical_reference, zmp_reference,
)
from tvmpc.planner.horizon import GaitClock, sample_phase
from tvmpc.planner.stepping import deadband, extrapolated_step
from tvmpc.prediction import HorizonDims

TIMING = GaitTiming(1.5, 0.5)
VERTICAL = VerticalParams(1.0, 0.0135, 0.00135, 0.0)
OMEGA = 3.132092


def schedule(**kw):
    args = dict(n_steps=5, step_length=0.2, step_width=0.1, foot_length=0.075, lateral_advance=0.1)
    args.update(kw)
    return diagonal_schedule(**args)


# --- ZMP reference ---------------------------------------------------------

def test_zmp_reference_single_support_holds_foot():
    assert zmp_reference(0.5, TIMING, 0.2, 0.2) == pytest.approx(0.2)


def test_zmp_reference_ramp_midpoint():
    assert zmp_reference(1.75, TIMING, 0.2, 0.2) == pytest.approx(0.3)


def test_zmp_reference_ramp_end():
    assert zmp_reference(2.0 - 1e-12, TIMING, 0.2, 0.2) == pytest.approx(0.4)


def test_zmp_reference_both_axes_at_once():
    out = zmp_reference(1.75, TIMING, [0.2, -0.05], [0.2, 0.2])
    np.testing.assert_allclose(out, [0.3, 0.05])


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.05, 2.0), st.floats(-1, 1), st.floats(-0.5, 0.5))
def test_zmp_reference_continuous_at_ds_switch(tss, tds, f, s):
    timing = GaitTiming(tss, tds)
    before = zmp_reference(math.nextafter(tss, 0.0), timing, f, s)
    after = zmp_reference(tss, timing, f, s)
    assert after == pytest.approx(before, abs=1e-12)


# --- vertical COM plan -----------------------------------------------------

def test_vertical_peak_mid_single_support():
    z, zd, zdd = vertical_reference(0.75, TIMING, VERTICAL)
    assert z == pytest.approx(1.0135)
    assert zd == pytest.approx(0.0, abs=1e-15)


def test_vertical_start_of_step():
    z, _, zdd = vertical_reference(0.0, TIMING, VERTICAL)
    assert z == 1.0
    assert zdd == 0.0


def test_vertical_mid_double_support_matches_symbolic():
    vp = VerticalParams(1.0, 0.0135, 0.00135, 0.1)
    t, tss, tds, z0, ads, dz = sympy.symbols("t T_ss T_ds z0 A_ds dz")
    tau = t - tss
    expr = z0 + ads * sympy.sin(sympy.pi * tau / tds) + dz * tau / tds
    subs = {t: sympy.Rational(7, 4), tss: sympy.Rational(3, 2), tds: sympy.Rational(1, 2),
            z0: 1, ads: sympy.Rational(135, 100000), dz: sympy.Rational(1, 10)}
    exact = float(expr.subs(subs))
    assert exact == pytest.approx(1.0 + 0.00135 + 0.05, abs=1e-15)
    z, zd, zdd = vertical_reference(1.75, TIMING, vp)
    assert z == pytest.approx(exact, abs=1e-12)
    assert zd == pytest.approx(float(sympy.diff(expr, t).subs(subs)), abs=1e-12)
    assert zdd == pytest.approx(float(sympy.diff(expr, t, 2).subs(subs)), abs=1e-12)


def test_vertical_support_offset_shifts_height():
    z0, _, _ = vertical_reference(0.3, TIMING, VERTICAL, support_z=0.0)
    z1, _, _ = vertical_reference(0.3, TIMING, VERTICAL, support_z=0.2)
    assert z1 - z0 == pytest.approx(0.2)


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.2, 0.2))
def test_vertical_continuous_at_ds_switch(a_ss, a_ds, dz):
    vp = VerticalParams(1.0, a_ss, a_ds, dz)
    before = vertical_reference(math.nextafter(1.5, 0.0), TIMING, vp)[0]
    after = vertical_reference(1.5, TIMING, vp)[0]
    assert before == pytest.approx(1.0, abs=1e-12)
    assert after == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.99), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.2, 0.2))
def test_vertical_derivatives_match_finite_differences(t, a_ss, a_ds, dz):
    vp = VerticalParams(1.0, a_ss, a_ds, dz)
    h = 1e-6
    if abs(t - 1.5) < 2 * h:
        return
    zm, zdm, _ = vertical_reference(t - h, TIMING, vp)
    zp, zdp, _ = vertical_reference(t + h, TIMING, vp)
    _, zd, zdd = vertical_reference(t, TIMING, vp)
    assert zd == pytest.approx((zp - zm) / (2 * h), abs=1e-6)
    assert zdd == pytest.approx((zdp - zdm) / (2 * h), abs=1e-5)


def test_vertical_params_reject_low_com():
    with pytest.raises(ValueError):
        VerticalParams(0.1, 0.05, 0.05, 0.1)


# --- step adjustment -------------------------------------------------------

def test_extrapolation_at_step_end_is_plain_offset():
    raw = extrapolated_step(0.25, 0.2, 2.0, 2.0, OMEGA)
    assert raw == pytest.approx(0.05)


def test_extrapolation_matches_integrated_dcm():
    raw = extrapolated_step(0.25, 0.2, 1.8, 2.0, OMEGA)
    assert raw == pytest.approx(0.05 * math.exp(0.626418), abs=1e-6)
    assert raw == pytest.approx(0.093545, abs=1e-6)
    # DCM dynamics with the ZMP held on the stance foot
    sol = solve_ivp(lambda t, z: OMEGA * (z - 0.2), (0.0, 0.2), [0.25], rtol=1e-12, atol=1e-14)
    assert sol.y[0, -1] - 0.2 == pytest.approx(raw, abs=1e-9)


def test_adjust_keeps_nominal_inside_margin():
    policy = StepAdjustPolicy(compliance_margin=0.02)
    # DCM whose extrapolation lands 0.01 past nominal
    zeta = 0.2 + 0.21 * math.exp(-OMEGA * 0.2)
    assert adjust_step(zeta, 0.2, 1.8, TIMING, OMEGA, policy, 0.2) == 0.2


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.99), st.floats(-0.4, 0.4), st.floats(-1, 1))
def test_adjust_noop_on_nominal_extrapolation(t, nominal, f_i):
    zeta = f_i + nominal * math.exp(-OMEGA * (2.0 - t))
    assert adjust_step(zeta, f_i, t, TIMING, OMEGA, StepAdjustPolicy(), nominal) == nominal


def test_adjust_moves_and_saturates():
    policy = StepAdjustPolicy(compliance_margin=0.02, reach_x=(-0.4, 0.4))
    assert adjust_step(0.25, 0.2, 1.8, TIMING, OMEGA, policy, 0.0) == pytest.approx(0.093545, abs=1e-6)
    assert adjust_step(0.5, 0.2, 1.0, TIMING, OMEGA, policy, 0.2) == 0.4
    assert adjust_step(-0.1, 0.2, 1.0, TIMING, OMEGA, policy, 0.2) == -0.4


def test_adjust_lateral_keep_out():
    policy = StepAdjustPolicy(keep_out_y=0.05)
    # crossing toward the stance foot is clipped to the keep-out line
    assert adjust_step(-0.1, 0.0, 1.0, TIMING, OMEGA, policy, 0.2, axis=1) == 0.05
    assert adjust_step(0.1, 0.0, 1.0, TIMING, OMEGA, policy, -0.2, axis=1) == -0.05


def test_policy_validation():
    with pytest.raises(ValueError):
        StepAdjustPolicy(compliance_margin=-0.1)
    with pytest.raises(ValueError):
        StepAdjustPolicy(reach_x=(0.1, 0.1))
    with pytest.raises(ValueError):
        StepAdjustPolicy(dcm_deadband=-1.0)


@given(st.floats(-1, 1), st.floats(0, 1))
def test_deadband_shrinks_toward_zero(v, w):
    out = deadband(v, w)
    assert abs(out) <= abs(v)
    assert out == 0.0 or math.copysign(1, out) == math.copysign(1, v)
    assert abs(out) == pytest.approx(max(abs(v) - w, 0.0))


# --- schedule --------------------------------------------------------------

def test_diagonal_schedule_alternates_sides():
    s = schedule()
    assert s.n_steps == 5
    # side of the advancing centerline
    sides = [np.sign(s.support(i).y - max(i, 0) * 0.1) for i in range(-1, 5)]
    assert sides == [1, -1, 1, -1, 1, -1]
    np.testing.assert_allclose(s.support(1).xy, [0.2, 0.15])
    np.testing.assert_allclose(s.support(2).xy, [0.4, 0.15])


def test_schedule_without_final_stand_reports_shortfall():
    s = schedule()
    s.final_stand = False
    with pytest.raises(ScheduleExhausted, match="short by 2"):
        s.anchor(6)


def test_shift_landing_moves_later_steps():
    s = schedule()
    before = [f.xy for f in s.footsteps]
    delta = s.shift_landing(0, [0.1, 0.2])
    np.testing.assert_allclose(delta, [-0.1, 0.0])
    np.testing.assert_allclose(s.footsteps[1].xy, before[1])
    for k in range(2, len(before)):
        np.testing.assert_allclose(s.footsteps[k].xy, before[k] + delta)
    np.testing.assert_allclose(s.nominal_offset(0), [0.2, 0.2])


def test_extend_repeats_last_stride():
    s = schedule(n_steps=2)
    s.extend(2)
    np.testing.assert_allclose(s.support(3).xy, [0.6, 0.35])
    np.testing.assert_allclose(s.support(4).xy, [0.8, 0.35])


# --- horizon ---------------------------------------------------------------

def test_bounds_mid_single_support():
    s = schedule()
    clock = GaitClock(1, 37, 75, 25, 0.02)
    ph = sample_phase(clock, s, TIMING, VERTICAL)
    f = s.support(1).xy
    np.testing.assert_allclose(ph.zmp_lo, f - 0.03375, atol=1e-15)
    np.testing.assert_allclose(ph.zmp_hi, f + 0.03375, atol=1e-15)


def test_flat_constant_height_gives_constant_omega():
    s = schedule()
    plans = build_horizon(GaitClock.start(TIMING, 0.02, 0), s, TIMING,
                          VerticalParams(1.0), HorizonDims(50, 2))
    np.testing.assert_allclose(plans[0].omega, OMEGA, atol=1e-6)
    np.testing.assert_array_equal(plans[0].omega, plans[1].omega)


def test_stair_omega_series_matches_vertical_plan():
    rise = 0.1
    s = schedule(rise=rise)
    vp = VerticalParams(1.0, 0.0135, 0.00135, rise)
    Np = 100
    clock = GaitClock.start(TIMING, 0.02, 0).advanced(60)
    plan = build_horizon(clock, s, TIMING, vp, HorizonDims(Np, 2))[0]
    assert np.ptp(plan.omega) > 1e-3
    for j in range(Np):
        c = clock.advanced(j + 1)
        t = c.t
        h0 = c.step_index * rise
        # independent evaluation of the vertical plan
        if t < 1.5:
            z = h0 + 1.0 + 0.0135 * math.sin(math.pi * t / 1.5)
            zdd = -0.0135 * (math.pi / 1.5) ** 2 * math.sin(math.pi * t / 1.5)
            support = h0
        else:
            tau = t - 1.5
            z = h0 + 1.0 + 0.00135 * math.sin(math.pi * tau / 0.5) + rise * tau / 0.5
            zdd = -0.00135 * (math.pi / 0.5) ** 2 * math.sin(math.pi * tau / 0.5)
            support = h0 + rise * tau / 0.5
        expected = math.sqrt((9.81 + zdd) / (z - support))
        assert plan.omega[j] == pytest.approx(expected, abs=1e-12)


def test_reference_within_bounds_over_whole_walk():
    s = schedule()
    clock = GaitClock.start(TIMING, 0.02, -1)
    for _ in range(700):
        ph = sample_phase(clock, s, TIMING, VERTICAL)
        assert np.all(ph.zmp_lo <= ph.zmp_ref + 1e-12)
        assert np.all(ph.zmp_ref <= ph.zmp_hi + 1e-12)
        clock = clock.advanced()


def test_horizon_past_schedule_without_final_stand():
    s = schedule(n_steps=1)
    s.final_stand = False
    with pytest.raises(ScheduleExhausted):
        build_horizon(GaitClock.start(TIMING, 0.02, 0), s, TIMING, VERTICAL, HorizonDims(150, 2))


def test_clock_requires_whole_samples():
    with pytest.raises(ValueError):
        GaitClock.start(GaitTiming(1.51, 0.5), 0.02)


def test_clock_wraps_into_next_step():
    c = GaitClock.start(TIMING, 0.02, -1).advanced(101)
    assert (c.step_index, c.tick) == (0, 1)


def test_input_limits_validation():
    with pytest.raises(ValueError):
        InputLimits(1.0, -1.0)


def test_natural_frequency_consistency_with_phase():
    s = schedule()
    ph = sample_phase(GaitClock(0, 10, 75, 25, 0.02), s, TIMING, VERTICAL)
    assert ph.omega == natural_frequency(PendulumParams(ph.z - ph.support_z, ph.z_acc))
