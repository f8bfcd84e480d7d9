import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eitkerr.channel import build_gate
from eitkerr.errors import BlowUpError, StabilityError
from eitkerr.params import (ChannelConfig, ControlProfile, Label, PhysicalParams, group_velocity,
                            mixing_angle)
from eitkerr.propagation import (DEPHASING_RATIO, ETA_MAX, compare_with_quadrature,
                                 convergence_study, expected_phase, flat_top_pulse,
                                 gaussian_pulse, grid_to_text, integrate, validity_check)

LINEAR = PhysicalParams(g2n=1e19, v0=10.0, c=299792458.0, L=0.2)
RAMP = ControlProfile.tanh_ramp(1e7, 10.0, 0.1, 0.01)
FIG2A = ChannelConfig(RAMP, RAMP, Label.FIG2A)
T = np.linspace(-5e-3, 5e-3, 101)
GAUSS = gaussian_pulse(1.0, 0.0, 1e-3)


def test_constant_control_is_pure_delay():
    prof = ControlProfile.constant(1e6)
    channel = ChannelConfig(prof, prof, Label.FIG2A)
    grid = integrate(LINEAR, channel, (GAUSS, GAUSS), 64, T)
    v = group_velocity(LINEAR, prof, 0.0)
    assert grid.delays[0, -1] == pytest.approx(LINEAR.L / v, rel=1e-2)
    assert grid.amplitude_ratio(0) == pytest.approx(1.0, rel=1e-2)
    assert np.allclose(grid.e1[-1], grid.e1[0], atol=1e-12)


def test_ramp_amplitude_follows_mixing_angle():
    grid = integrate(LINEAR, FIG2A, (GAUSS, GAUSS), 128, T)
    want = (math.cos(float(mixing_angle(LINEAR, RAMP, LINEAR.L)))
            / math.cos(float(mixing_angle(LINEAR, RAMP, 0.0))))
    assert grid.amplitude_ratio(0) == pytest.approx(want, rel=1e-2)
    assert grid.amplitude_ratio(1) == pytest.approx(want, rel=1e-2)


def test_fourth_order_convergence():
    sizes, errors, orders = convergence_study(LINEAR, FIG2A, (GAUSS, GAUSS), T, 128, 3)
    assert errors[0] < 1e-2
    assert min(orders) >= 3.5


def test_kerr_phase_matches_quadrature():
    tuned, _ = build_gate(LINEAR.with_mu(((6.4e-17, 3.2e-17), (3.2e-17, 6.4e-17))), FIG2A)
    intensity = tuned.c / (3 * math.pi)
    pulse = flat_top_pulse(math.sqrt(intensity), -3e-3, 3e-3, 2e-4)
    grid = integrate(tuned, FIG2A, (pulse, pulse), 1024, T)
    i = int(np.argmin(np.abs(T)))
    want = expected_phase(tuned, FIG2A, [abs(grid.e1[0, i]) ** 2, abs(grid.e2[0, i]) ** 2])
    assert grid.phase_at(0, 0.0) == pytest.approx(want[0], rel=1e-3)
    assert grid.phase_at(1, 0.0) == pytest.approx(want[1], rel=1e-3)


def test_kerr_phase_converges_monotonically():
    tuned, _ = build_gate(LINEAR.with_mu(((6.4e-17, 3.2e-17), (3.2e-17, 6.4e-17))), FIG2A)
    pulse = flat_top_pulse(math.sqrt(tuned.c / (3 * math.pi)), -3e-3, 3e-3, 2e-4)
    errs = []
    for nz in (128, 256, 512):
        rows = compare_with_quadrature(tuned, FIG2A, integrate(tuned, FIG2A, (pulse, pulse), nz, T), 0.0)
        errs.append(dict((r[0], r[3]) for r in rows)["phase_1"])
    assert errs[0] > errs[1] > errs[2]


def test_walk_off_between_unequal_profiles_runs():
    hold = ControlProfile.constant(1e7)
    channel = ChannelConfig(RAMP, hold, Label.FIG2B)
    params = LINEAR.with_mu(((0, 1e-30), (1e-30, 0)))
    grid = integrate(params, channel, (GAUSS, GAUSS), 128, T)
    assert grid.delays[0, -1] > grid.delays[1, -1]
    assert np.all(np.isfinite(grid.e1)) and np.all(np.isfinite(grid.e2))


def test_coarse_grid_is_refused():
    with pytest.raises(StabilityError) as err:
        integrate(LINEAR, FIG2A, (GAUSS, GAUSS), 4, T)
    assert 0 < err.value.required_step < LINEAR.L / 4


def test_non_finite_input_is_a_blow_up():
    bad = lambda t: np.where(np.abs(t) < 1e-4, np.nan, 1.0)
    with pytest.raises(BlowUpError):
        integrate(LINEAR, FIG2A, (bad, GAUSS), 64, T)


def test_grid_dump_is_columnar():
    grid = integrate(LINEAR, FIG2A, (GAUSS, GAUSS), 32, T[:11])
    lines = grid_to_text(grid).splitlines()
    assert lines[0].split(",")[0] == "z"
    assert len(lines) == 1 + 33 * 11
    assert all(len(line.split(",")) == 8 for line in lines)


def detuned(delta, L=0.2, **kw):
    return PhysicalParams(g2n=1e19, v0=10.0, c=299792458.0, L=L, delta=(delta, delta), **kw)


def test_resonance_means_no_loss():
    params = PhysicalParams(g2n=1e19, v0=10.0, c=299792458.0, L=0.2,
                            mu_bj=(1.5, 0.25), delta=(-1.5, -0.25))
    report = validity_check(params, FIG2A, 1e-5)
    assert report.eta == (0.0, 0.0) and report.eta_bound == (0.0, 0.0)
    assert report.transmission == (1.0, 1.0)


def test_loss_bound_at_one_percent():
    # |delta| L / v0 = 0.01
    report = validity_check(detuned(0.5), FIG2A, 1e-5)
    assert report.eta_bound[0] == pytest.approx(0.01, rel=1e-14)
    # the quoted 0.99005 is exp(-0.01) = 0.9900498... to five digits
    assert min(report.transmission) >= math.exp(-0.01)
    assert round(min(report.transmission), 5) == 0.99005
    assert report.loss_ok
    assert not validity_check(detuned(0.5 * 1.001), FIG2A, 1e-5).loss_ok


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 10.0), st.floats(0.15, 2.0), st.floats(1.1, 5.0))
def test_eta_bound_linear(delta, L, k):
    one = validity_check(detuned(delta, L), FIG2A, 1e-5, n_samples=11).eta_bound[0]
    assert validity_check(detuned(k * delta, L), FIG2A, 1e-5, n_samples=11).eta_bound[0] \
        == pytest.approx(k * one, rel=1e-12)
    assert validity_check(detuned(delta, k * L), FIG2A, 1e-5, n_samples=11).eta_bound[0] \
        == pytest.approx(k * one, rel=1e-12)
    assert 0 <= one


def test_dephasing_threshold():
    prof = ControlProfile.constant(1e6)
    channel = ChannelConfig(prof, prof, Label.FIG2A)
    v = float(group_velocity(LINEAR, prof, 0.0))
    ten = validity_check(LINEAR, channel, 10 * LINEAR.lambda_probe / v)
    assert ten.dephasing_ratio == pytest.approx(10.0, rel=1e-12)
    assert not ten.dephasing_ok
    above = validity_check(LINEAR, channel, DEPHASING_RATIO * 1.0001 * LINEAR.lambda_probe / v)
    below = validity_check(LINEAR, channel, DEPHASING_RATIO * 0.9999 * LINEAR.lambda_probe / v)
    assert above.dephasing_ok and not below.dephasing_ok


def test_doppler_threshold():
    base = dict(g2n=1e19, v0=10.0, c=299792458.0, L=0.2, dk=(1e3, 1e3), mu_bj=(1.0, 1.0))
    margin = (1 / 0.2 - 1.0 / 10.0) / 1e3
    ok = PhysicalParams(velocity_spread=0.099 * margin * 10.0, **base)
    bad = PhysicalParams(velocity_spread=0.101 * margin * 10.0, **base)
    assert validity_check(ok, FIG2A, 1e-5).doppler_ok
    assert not validity_check(bad, FIG2A, 1e-5).doppler_ok
    strong = dict(base, mu_bj=(60.0, 60.0))
    assert not validity_check(PhysicalParams(**strong), FIG2A, 1e-5).doppler_ok


def test_adiabatic_threshold():
    r = validity_check(LINEAR, FIG2A, 1e-5)
    scale = 1e-5 / r.adiabatic_parameter
    assert validity_check(LINEAR, FIG2A, 0.999 * scale).adiabatic_ok
    assert not validity_check(LINEAR, FIG2A, 1.001 * scale).adiabatic_ok


def test_report_text():
    text = validity_check(LINEAR, FIG2A, 1e-5).as_text()
    keys = [line.split(" = ")[0] for line in text.splitlines()]
    assert {"eta", "eta_bound", "loss_ok", "doppler_ok", "dephasing_ok", "adiabatic_ok"} <= set(keys)
    assert ETA_MAX == 0.01
