import math

import numpy as np
import pytest
from scipy.special import j1

from chiral_pinem.errors import DomainError, ShapeError
from chiral_pinem.nearfield import (Grid2D, HoleGeometry, InteractionField, PulsePair,
                                    envelope_weight, reference_amplitude_from_geometry,
                                    second_pulse_field, superpose_fields, superpose_two_pulses,
                                    synthesize_beta)
from chiral_pinem.optics import (IncidentLight, MaterialStack, PolarizationState,
                                 derive_spp_wavevector)

GRID = Grid2D.square(128, 2e-6)
GEOM = HoleGeometry()


def beta_for(pol, A=0.25, B=0.25, grid=GRID):
    return synthesize_beta(GEOM, grid, IncidentLight(polarization=pol), MaterialStack(), A, B)


def test_grid_geometry():
    g = Grid2D(32, 16, 1.0, 2.0)
    assert g.shape == (16, 32)
    assert g.dx == pytest.approx(2 / 32) and g.dy == pytest.approx(4 / 16)
    ix, iy = g.center_index
    assert g.x[ix] == 0 and g.y[iy] == 0
    with pytest.raises(DomainError):
        Grid2D(15, 16, 1, 1)
    with pytest.raises(DomainError):
        Grid2D(16, 16, 0, 1)


def test_center_is_exact_zero():
    for pol in (PolarizationState.circular(1), PolarizationState.linear(0.4),
                PolarizationState.elliptical(0.3, 1.0)):
        b = beta_for(pol)
        ix, iy = GRID.center_index
        assert b.values[iy, ix] == 0


def test_exterior_formula():
    pol = PolarizationState.elliptical(0.2, 0.5)
    A, B = 0.1 + 0.05j, 0.3
    b = beta_for(pol, A, B)
    k = derive_spp_wavevector(IncidentLight(), MaterialStack())
    iy, ix = 100, 30
    x, y = GRID.x[ix], GRID.y[iy]
    R, phi = math.hypot(x, y), math.atan2(y, x)
    a = GEOM.radius
    want = A + B * np.exp(1j * k * (R - a)) * math.sqrt(a / R) * (
        pol.a_plus * np.exp(1j * phi) + pol.a_minus * np.exp(-1j * phi))
    assert b.values[iy, ix] == pytest.approx(want, rel=1e-12)


def test_interior_formula_and_reference_only_outside():
    pol = PolarizationState.circular(1)
    b0 = beta_for(pol, 0.0)
    b1 = beta_for(pol, 0.7)
    R, _ = GRID.polar()
    inside = R < GEOM.radius
    np.testing.assert_array_equal(b0.values[inside], b1.values[inside])
    np.testing.assert_allclose(b1.values[~inside] - b0.values[~inside], 0.7, atol=1e-14)
    k = derive_spp_wavevector(IncidentLight(), MaterialStack()).real
    iy, ix = GRID.center_index
    ix += 7
    Rp = GRID.x[ix]
    assert abs(b0.values[iy, ix]) == pytest.approx(
        0.25 * abs(j1(k * Rp) / j1(k * GEOM.radius)), rel=1e-12)


def test_continuity_at_rim_along_x():
    pol = PolarizationState.circular(1)
    fine = Grid2D.square(2048, 1e-6)
    b = beta_for(pol, 0.0, grid=fine)
    iy, ix = fine.center_index
    row = b.values[iy]
    x = fine.x
    a = GEOM.radius
    i = np.flatnonzero(x < a)[-1]
    inner = row[i] + (row[i] - row[i - 1]) * (a - x[i]) / (x[i] - x[i - 1])
    outer = row[i + 1] - (row[i + 2] - row[i + 1]) * (x[i + 1] - a) / (x[i + 2] - x[i + 1])
    assert abs(inner - outer) < 1e-3 * abs(outer)
    assert outer == pytest.approx(0.25, rel=1e-3)


def test_circular_modulus_is_azimuthally_uniform():
    b = beta_for(PolarizationState.circular(-1), 0.0)
    R, _ = GRID.polar()
    sel = np.isclose(R, R[64, 64 + 20], rtol=1e-12, atol=0)
    assert np.ptp(b.modulus[sel]) < 1e-12


def test_linear_in_B_and_gauge():
    pol = PolarizationState.linear(0.3)
    b1 = beta_for(pol, 0.0, 0.1)
    b2 = beta_for(pol, 0.0, 0.2)
    np.testing.assert_allclose(b2.values, 2 * b1.values, rtol=0, atol=1e-15)
    bc = beta_for(pol, 0.0, 0.1j)
    np.testing.assert_allclose(bc.values, 1j * b1.values, rtol=0, atol=1e-15)


def test_zero_B_leaves_reference_only():
    b = beta_for(PolarizationState.circular(1), 0.3, 0.0)
    R, _ = GRID.polar()
    assert np.all(b.values[R < GEOM.radius] == 0)
    assert np.all(b.values[R >= GEOM.radius] == 0.3)


def test_rim_on_bessel_zero_rejected():
    light = IncidentLight()
    k = derive_spp_wavevector(light, MaterialStack()).real
    radius = 3.8317059702075125 / k
    with pytest.raises(DomainError, match="zero of J1"):
        synthesize_beta(HoleGeometry(radius), GRID, light, MaterialStack(), 0, 1)


def test_preconditions():
    light = IncidentLight(polarization=PolarizationState(1.0, 1.0))
    with pytest.raises(DomainError):
        synthesize_beta(GEOM, GRID, light, MaterialStack(), 0, 1)
    with pytest.raises(DomainError):
        synthesize_beta(GEOM, Grid2D.square(32, 0.5e-6), IncidentLight(), MaterialStack(), 0, 1)


def test_interaction_field_immutable_and_finite():
    f = InteractionField(Grid2D.square(16, 1.0), np.zeros((16, 16)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1
    bad = np.zeros((16, 16), complex)
    bad[1, 1] = np.nan
    with pytest.raises(DomainError):
        InteractionField(Grid2D.square(16, 1.0), bad)
    with pytest.raises(ShapeError):
        InteractionField(Grid2D.square(16, 1.0), np.zeros((16, 18)))


def test_presets():
    light = IncidentLight()
    assert reference_amplitude_from_geometry(light, "vortex_detection") == 0
    assert reference_amplitude_from_geometry(light, "holography") == pytest.approx(0.25)
    assert reference_amplitude_from_geometry(light, "holography", b=0.5, b_over_a=2) == 0.25
    with pytest.raises(DomainError):
        reference_amplitude_from_geometry(light, "nope")


def test_two_pulse_superposition_is_periodic():
    light = IncidentLight(polarization=PolarizationState.elliptical(0.3, 0.0))
    b1 = synthesize_beta(GEOM, GRID, light, MaterialStack(), 0.25, 0.25)
    pair = PulsePair(light.polarization, PolarizationState.elliptical(0.3, math.pi / 2))
    T = light.optical_period
    f0 = superpose_two_pulses(b1, pair.at(0.3e-15), light)
    fT = superpose_two_pulses(b1, pair.at(0.3e-15 + T), light)
    np.testing.assert_allclose(f0.values, fT.values, rtol=0, atol=1e-12)


def test_zero_second_amplitude_is_single_pulse():
    light = IncidentLight()
    b1 = synthesize_beta(GEOM, GRID, light, MaterialStack(), 0.25, 0.25)
    pair = PulsePair(light.polarization, PolarizationState.linear(0.0), rel_amplitude_2=0.0)
    out = superpose_two_pulses(b1, pair.at(1.1e-15), light)
    np.testing.assert_array_equal(out.values, b1.values)


def test_second_pulse_without_reference():
    light = IncidentLight()
    b1 = synthesize_beta(GEOM, GRID, light, MaterialStack(), 0.25, 0.25)
    pair = PulsePair(light.polarization, light.polarization)
    b2 = second_pulse_field(b1, pair, second_reference=False)
    b0 = synthesize_beta(GEOM, GRID, light, MaterialStack(), 0.0, 0.25)
    np.testing.assert_allclose(b2.values, b0.values, atol=1e-15)


def test_superpose_grid_mismatch():
    a = InteractionField(Grid2D.square(16, 1.0), np.zeros((16, 16)))
    b = InteractionField(Grid2D.square(16, 2.0), np.zeros((16, 16)))
    with pytest.raises(ShapeError):
        superpose_fields(a, b, 0.0, 1.0)


def test_envelope_weight():
    assert envelope_weight(0.0, 55e-15) == 1.0
    assert envelope_weight(55e-15, 55e-15) == pytest.approx(math.exp(-2 * math.log(2)))
    with pytest.raises(DomainError):
        PulsePair(PolarizationState.circular(1), PolarizationState.circular(1), envelope_fwhm=0)
