import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiral_pinem.analysis import (DelayScan, DelayScanConfig, fit_oscillation, fringe_period,
                                   helicity_of_field, oam_spectrum, run_delay_scan,
                                   sign_changes_per_cycle, topological_charge, zero_crossings)
from chiral_pinem.errors import (DegenerateError, DomainError, InsufficientFringesError,
                                 UnreliableLoopError)
from chiral_pinem.nearfield import Grid2D, HoleGeometry, PulsePair, synthesize_beta
from chiral_pinem.optics import IncidentLight, MaterialStack, PolarizationState
from chiral_pinem.sampling import RadialCut

import oracles

GRID = Grid2D.square(128, 2e-6)
GEOM = HoleGeometry()


def vortex(m, w=0.8e-6):
    def f(x, y):
        R = np.hypot(x, y)
        return (R / w) ** abs(m) * np.exp(-(R / w) ** 2) * np.exp(1j * m * np.arctan2(y, x))
    return f


def on_grid(f):
    return f(GRID.x[None, :], GRID.y[:, None])


def beta_for(pol, A=0.25, B=0.25, grid=GRID):
    return synthesize_beta(GEOM, grid, IncidentLight(polarization=pol), MaterialStack(), A, B)


@pytest.mark.parametrize("m", [-4, -1, 0, 3])
def test_pure_eigenstate_spectrum(m):
    spectrum = oam_spectrum(on_grid(vortex(m)), GRID)
    assert spectrum.power(m) > 1 - 1e-6
    others = spectrum.powers[spectrum.ms != m]
    assert others.max() < 1e-6
    assert spectrum.powers.sum() == pytest.approx(1.0, abs=1e-12)
    assert spectrum.dominant() == m


def test_spectrum_of_callable_is_exact():
    spectrum = oam_spectrum(vortex(3), GRID, 0.1e-6, 1.5e-6)
    assert spectrum.power(3) == pytest.approx(1.0, abs=1e-12)
    assert spectrum.r_min == pytest.approx(0.1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(-5, 5))
def test_charge_additivity(q):
    """Multiplying by exp(i q phi) shifts every coefficient by q."""
    base = vortex(1)

    def mixed(x, y):
        return base(x, y) + 0.5 * vortex(-2)(x, y) + 0.2 * vortex(0)(x, y)

    def shifted(x, y):
        return mixed(x, y) * np.exp(1j * q * np.arctan2(y, x))

    a = oam_spectrum(mixed, GRID, 0.05e-6, 1.5e-6).as_dict()
    b = oam_spectrum(shifted, GRID, 0.05e-6, 1.5e-6).as_dict()
    for m, p in a.items():
        assert b.get(m + q, 0.0) == pytest.approx(p, abs=1e-9)


def test_charge_additivity_on_grid_arrays():
    field = on_grid(vortex(1)) + 0.5 * on_grid(vortex(-2))
    a = oam_spectrum(field, GRID, 0.05e-6, 1.5e-6)
    b = oam_spectrum(field * np.exp(2j * GRID.polar()[1]), GRID, 0.05e-6, 1.5e-6)
    for m in (1, -2):
        assert b.power(m + 2) == pytest.approx(a.power(m), abs=2e-3)


def test_zero_field_rejected():
    with pytest.raises(DomainError):
        oam_spectrum(np.zeros(GRID.shape), GRID)
    with pytest.raises(DomainError):
        oam_spectrum(on_grid(vortex(1)), GRID, 1e-6, 0.5e-6)
    with pytest.raises(DomainError):
        oam_spectrum(on_grid(vortex(1)), GRID, 0.0, 3e-6)


@pytest.mark.parametrize("m", [1, -2, 5])
def test_topological_charge_trivial(m):
    res = topological_charge(on_grid(vortex(m)), GRID, 0.5e-6)
    assert res.charge == m
    assert res.residual < 1e-9


def test_topological_charge_invariances():
    f = on_grid(vortex(2))
    base = topological_charge(f, GRID, 0.6e-6)
    for c in (1j, -3.0, 1e-5 * np.exp(0.4j)):
        r = topological_charge(c * f, GRID, 0.6e-6)
        assert r.charge == base.charge
        assert r.winding == pytest.approx(base.winding, abs=1e-12)


def test_unreliable_loop():
    with pytest.raises(UnreliableLoopError):
        topological_charge(on_grid(vortex(1)), GRID, 0.0)


@pytest.mark.parametrize("sigma", [1, -1])
def test_beta_core_charge(sigma):
    b = beta_for(PolarizationState.circular(sigma))
    res = topological_charge(b.values, GRID, 0.3e-6)
    assert res.charge == sigma
    assert res.residual < 0.02


def test_helicity_limits_and_antisymmetry():
    assert helicity_of_field(beta_for(PolarizationState.circular(1))) == pytest.approx(1.0)
    assert helicity_of_field(beta_for(PolarizationState.circular(-1))) == pytest.approx(-1.0)
    assert helicity_of_field(beta_for(PolarizationState.linear(0.3))) == pytest.approx(0, abs=1e-9)
    pol = PolarizationState.elliptical(0.25, 0.7)
    h = helicity_of_field(beta_for(pol))
    assert h == pytest.approx(math.sin(2 * 0.25), abs=1e-6)
    assert helicity_of_field(beta_for(pol.swapped())) == pytest.approx(-h, abs=1e-9)


def test_helicity_degenerate():
    b = beta_for(PolarizationState.circular(1), A=0.1, B=0.0)
    with pytest.raises(DegenerateError):
        helicity_of_field(b)


def test_fringe_period_synthetic():
    grid = Grid2D.square(512, 3e-6)
    k = 10e6
    X = grid.x[None, :] + 0 * grid.y[:, None]
    img = np.cos(k * X / 2) ** 2  # period 2 pi / k
    p = fringe_period(img, grid, RadialCut(0.0, 0.0, 2.9e-6))
    assert p == pytest.approx(2 * np.pi / k, abs=grid.dx / 10)


def test_fringe_period_insufficient():
    flat = np.ones(GRID.shape)
    with pytest.raises(InsufficientFringesError):
        fringe_period(flat, GRID, RadialCut(0.0, 0.5e-6))


def test_fit_oscillation_recovers_parameters():
    t = np.arange(24) * 0.334e-15
    T = 2.67e-15
    y = 0.3 * np.cos(2 * np.pi * t / T + 0.4) + 1.2
    fit = fit_oscillation(t, y)
    assert fit.period == pytest.approx(T, rel=1e-8)
    assert fit.amplitude == pytest.approx(0.3, rel=1e-8)
    assert fit.phase == pytest.approx(0.4, abs=1e-7)
    assert fit.offset == pytest.approx(1.2, rel=1e-9)


def test_fit_oscillation_with_harmonics():
    t = np.arange(24) * 0.334e-15
    w = 2 * np.pi / 2.6e-15
    y = np.cos(w * t) + 0.4 * np.cos(2 * w * t + 1) + 0.1 * np.sin(3 * w * t)
    fit = fit_oscillation(t, y, harmonics=3)
    assert fit.period == pytest.approx(2.6e-15, rel=1e-8)
    assert fit.harmonics == 3
    assert fit.rms_residual < 1e-8


def test_fit_constant_and_short():
    fit = fit_oscillation(np.arange(8.0), np.ones(8))
    assert math.isnan(fit.period) and fit.amplitude == 0
    with pytest.raises(DomainError):
        fit_oscillation(np.arange(3.0), np.arange(3.0))


def test_zero_crossings_and_cycles():
    t = np.linspace(0, 4, 401)
    y = np.sin(2 * np.pi * t + 0.1)
    c = zero_crossings(t, y)
    assert len(c) == 8
    assert sign_changes_per_cycle(t, y, 1.0) == [2, 2, 2, 2]


def scan_config(pol_2, rel=1.0, grid=Grid2D.square(96, 2e-6)):
    pol_1 = PolarizationState.elliptical(math.radians(20), 0.0)
    return DelayScanConfig(PulsePair(pol_1, pol_2, rel), grid=grid)


def test_single_pulse_scan_is_flat():
    cfg = scan_config(PolarizationState.linear(0.0), rel=0.0)
    scan = run_delay_scan(cfg, np.arange(5) * 0.5e-15)
    for arr in (scan.helicity, scan.intensity):
        assert np.ptp(arr) == 0
    assert np.ptp(np.nan_to_num(scan.fringe_period)) == 0


def test_scan_periodicity_and_helicity_oracle():
    chi = math.radians(20)
    pol_2 = PolarizationState.elliptical(chi, math.pi / 2)
    cfg = scan_config(pol_2)
    T = IncidentLight().optical_period
    d = np.array([0.2, 0.9, 1.7]) * 1e-15
    a = run_delay_scan(cfg, d)
    b = run_delay_scan(cfg, d + T)
    np.testing.assert_allclose(a.helicity, b.helicity, rtol=0, atol=1e-9)
    np.testing.assert_allclose(a.intensity, b.intensity, rtol=1e-9)
    w = IncidentLight().angular_frequency
    for dt, h in zip(d, a.helicity):
        want = oracles.two_pulse_helicity(oracles.elliptical_jones(chi, 0.0),
                                          oracles.elliptical_jones(chi, math.pi / 2), w * dt)
        assert h == pytest.approx(want, abs=1e-6)


def test_scan_deterministic():
    cfg = scan_config(PolarizationState.elliptical(0.3, 0.0))
    d = np.arange(3) * 0.4e-15
    a, b = run_delay_scan(cfg, d), run_delay_scan(cfg, d)
    np.testing.assert_array_equal(a.intensity, b.intensity)
    np.testing.assert_array_equal(a.helicity, b.helicity)


def test_scan_rejects_unsorted_and_attaches_delay():
    cfg = scan_config(PolarizationState.linear(0.0))
    with pytest.raises(DomainError):
        run_delay_scan(cfg, [1e-15, 0.5e-15])
    with pytest.raises(DomainError):
        DelayScan(np.array([2.0, 1.0]), np.zeros(2), np.zeros(2), np.zeros(2))
    pol = PolarizationState.circular(1)
    bad = DelayScanConfig(PulsePair(pol, pol), grid=Grid2D.square(96, 2e-6),
                          helicity_annulus=(0.1e-6, 5e-6))
    with pytest.raises(DomainError) as info:
        run_delay_scan(bad, np.array([0.25e-15, 0.5e-15]))
    assert info.value.delay == 0.25e-15
    assert "0.2500 fs" in str(info.value)
