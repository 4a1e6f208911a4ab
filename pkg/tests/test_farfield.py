import numpy as np
import pytest
from scipy.signal import find_peaks

from chiral_pinem.errors import DomainError, ShapeError
from chiral_pinem.farfield import (DetectorModel, broaden, far_field, k_axes, line_profile,
                                   peak_radius, radial_profile, small_angle_fraction,
                                   spiral_phase_plate_reference, transform, transmission_mask)
from chiral_pinem.nearfield import Grid2D, HoleGeometry, InteractionField, synthesize_beta
from chiral_pinem.optics import IncidentLight, MaterialStack, PolarizationState
from chiral_pinem.pinem import build_sidebands, gaussian_wavefunction

GRID = Grid2D.square(128, 3e-6)
GEOM = HoleGeometry()


def sidebands(pol, A=0.0):
    light = IncidentLight(polarization=pol)
    beta = synthesize_beta(GEOM, GRID, light, MaterialStack(), A, 0.25)
    return build_sidebands(gaussian_wavefunction(GRID), beta)


def test_k_axes_convention():
    kx, ky = k_axes(GRID, 2)
    assert kx[len(kx) // 2] == 0
    assert kx[1] - kx[0] == pytest.approx(2 * np.pi / (2 * 2 * GRID.extent_x))


def test_gaussian_transform_analytic():
    w = 0.5e-6
    psi = gaussian_wavefunction(GRID, width=w)
    F = transform(GRID, psi.values, 2)
    kx, ky = k_axes(GRID, 2)
    K2 = kx[None, :] ** 2 + ky[:, None] ** 2
    amp = psi.values[GRID.center_index[1], GRID.center_index[0]].real
    want = amp * np.pi * w ** 2 * np.exp(-K2 * w ** 2 / 4)
    np.testing.assert_allclose(F, want, rtol=0, atol=1e-12 * np.abs(want).max())


def test_shift_theorem_phase_free_intensity():
    psi = gaussian_wavefunction(GRID, width=0.4e-6, center=(0.3e-6, -0.2e-6))
    ref = gaussian_wavefunction(GRID, width=0.4e-6)
    a = np.abs(transform(GRID, psi.values)) ** 2
    b = np.abs(transform(GRID, ref.values)) ** 2
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-10 * b.max())


def test_transform_shape_check():
    with pytest.raises(ShapeError):
        transform(GRID, np.zeros((64, 64)))


def test_parseval_per_order():
    sb = sidebands(PolarizationState.circular(1), A=0.25)
    ff = far_field(sb, DetectorModel(), GEOM, 2)
    for l in sb.orders:
        r, k = ff.meta["real_norms"][int(l)], ff.meta["k_norms"][int(l)]
        assert k == pytest.approx((2 * np.pi) ** 2 * r, rel=1e-9, abs=1e-300)


def test_broadening_conserves_sum():
    rng = np.random.default_rng(0)
    img = rng.random((64, 64))
    out = broaden(img, 3.0, 1.0, 1.0)
    assert out.sum() == pytest.approx(img.sum(), rel=1e-12)
    np.testing.assert_array_equal(broaden(img, 0.0, 1.0, 1.0), img)


def test_mask_regions():
    det = DetectorModel(aperture_radius_image_plane=2e-6)
    m = transmission_mask(GRID, GEOM, det)
    R, _ = GRID.polar()
    assert np.all(m[R < GEOM.radius] == 1)
    assert np.allclose(m[(R >= GEOM.radius) & (R <= 2e-6)], np.sqrt(0.013))
    assert np.all(m[R > 2e-6] == 0)
    assert np.all(transmission_mask(GRID, GEOM, det.hole_only())[R >= GEOM.radius] == 0)


def test_detector_validation():
    with pytest.raises(DomainError):
        DetectorModel(momentum_broadening_sigma=-1)


def test_no_illumination_gives_central_spot():
    psi = gaussian_wavefunction(GRID)
    sb = build_sidebands(psi, InteractionField(GRID, np.zeros(GRID.shape)))
    ff = far_field(sb, DetectorModel(), GEOM, 2)
    assert ff.at_origin() == ff.intensity.max()
    h = line_profile(ff, "horizontal")
    # weak rings from the hole edge sit below 1% of the spot
    assert len(find_peaks(h, prominence=0.01 * h.max())[0]) == 1
    assert peak_radius(ff) == 0.0


def test_pad_factor_validation():
    sb = sidebands(PolarizationState.circular(1))
    with pytest.raises(DomainError):
        far_field(sb, pad_factor=1)


def test_phase_plate_null_and_doughnut():
    psi = gaussian_wavefunction(GRID)
    det = DetectorModel().hole_only()
    ref = spiral_phase_plate_reference(1, GEOM, psi, det.unbroadened(), 2)
    assert ref.at_origin(raw=True) < 1e-12 * ref.raw.max()
    k, prof = radial_profile(ref, raw=True)
    assert prof.argmax() > 0


def test_profiles_and_fraction():
    sb = sidebands(PolarizationState.circular(1))
    ff = far_field(sb, DetectorModel().hole_only(), GEOM, 2, orders=[1])
    h, v = line_profile(ff, "horizontal"), line_profile(ff, "vertical")
    np.testing.assert_allclose(h, v, rtol=1e-6, atol=1e-9 * h.max())
    with pytest.raises(DomainError):
        line_profile(ff, "diagonal")
    assert small_angle_fraction(ff, ff.intensity, 1e7) == pytest.approx(1.0)


def test_far_field_deterministic():
    sb = sidebands(PolarizationState.linear(0.2), A=0.25)
    a = far_field(sb, DetectorModel(), GEOM, 2)
    b = far_field(sb, DetectorModel(), GEOM, 2)
    np.testing.assert_array_equal(a.intensity, b.intensity)
