"""Momentum-space maps of the sideband wavefunctions.

Psi_l(k) = integral exp(-i k.R) psi_l(R) d^2R, evaluated with a zero-padded
FFT; momentum follows the 2 pi / distance convention and k = 0 sits at the
array centre. The aperture and the semi-transparent film are applied in real
space before the transform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DomainError, ShapeError
from .nearfield import Grid2D, HoleGeometry
from .pinem import IncidentWavefunction, SidebandSet


@dataclass(frozen=True)
class DetectorModel:
    """Instrument response: broadening sigma in 1/m, aperture radius in m."""

    momentum_broadening_sigma: float = 0.35e6
    aperture_radius_image_plane: float = 7.5e-6
    film_intensity_transmissivity: float = 0.013

    def __post_init__(self):
        for name in ("momentum_broadening_sigma", "aperture_radius_image_plane",
                     "film_intensity_transmissivity"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    def hole_only(self) -> "DetectorModel":
        """Same detector with an opaque film: only the hole transmits."""
        return DetectorModel(self.momentum_broadening_sigma, self.aperture_radius_image_plane, 0.0)

    def unbroadened(self) -> "DetectorModel":
        return DetectorModel(0.0, self.aperture_radius_image_plane,
                             self.film_intensity_transmissivity)


@dataclass(frozen=True, eq=False)
class FarFieldMap:
    """Momentum-space intensity. ``intensity`` includes broadening, ``raw`` does not."""

    kx: np.ndarray
    ky: np.ndarray
    intensity: np.ndarray
    raw: np.ndarray
    orders: tuple[int, ...]
    fields: dict | None = None
    meta: dict = field(default_factory=dict)

    @property
    def dkx(self) -> float:
        return float(self.kx[1] - self.kx[0])

    @property
    def dky(self) -> float:
        return float(self.ky[1] - self.ky[0])

    @property
    def center_index(self) -> tuple[int, int]:
        return len(self.kx) // 2, len(self.ky) // 2

    def at_origin(self, raw: bool = False) -> float:
        ix, iy = self.center_index
        return float((self.raw if raw else self.intensity)[iy, ix])


def transmission_mask(grid: Grid2D, geom: HoleGeometry, detector: DetectorModel) -> np.ndarray:
    """Amplitude transmission: 1 in the hole, sqrt(T_film) on the film, 0 past the aperture."""
    R, _ = grid.polar(geom.center)
    film = np.sqrt(detector.film_intensity_transmissivity)
    mask = np.where(R < geom.radius, 1.0, film)
    mask[R > detector.aperture_radius_image_plane] = 0.0
    return mask


def k_axes(grid: Grid2D, pad_factor: int) -> tuple[np.ndarray, np.ndarray]:
    Nx, Ny = pad_factor * grid.nx, pad_factor * grid.ny
    kx = (np.arange(Nx) - Nx // 2) * (2.0 * np.pi / (Nx * grid.dx))
    ky = (np.arange(Ny) - Ny // 2) * (2.0 * np.pi / (Ny * grid.dy))
    return kx, ky


def transform(grid: Grid2D, values: np.ndarray, pad_factor: int = 2) -> np.ndarray:
    """Centred, zero-padded continuous Fourier transform of one field."""
    if values.shape != grid.shape:
        raise ShapeError(f"field shape {values.shape} does not match grid {grid.shape}")
    Nx, Ny = pad_factor * grid.nx, pad_factor * grid.ny
    g = np.zeros((Ny, Nx), dtype=np.complex128)
    oy, ox = (Ny - grid.ny) // 2, (Nx - grid.nx) // 2
    g[oy:oy + grid.ny, ox:ox + grid.nx] = values
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(g))) * grid.pixel_area


def broaden(intensity: np.ndarray, sigma: float, dkx: float, dky: float) -> np.ndarray:
    """Isotropic Gaussian blur of width ``sigma`` (1/m); periodic, sum-preserving."""
    if sigma == 0:
        return intensity.copy()
    return gaussian_filter(intensity, sigma=(sigma / dky, sigma / dkx), mode="wrap")


def _propagate(grid: Grid2D, channels, mask: np.ndarray, detector: DetectorModel,
               pad_factor: int, keep_fields: bool):
    if pad_factor < 2 or int(pad_factor) != pad_factor:
        raise DomainError("pad_factor must be an integer >= 2")
    pad_factor = int(pad_factor)
    kx, ky = k_axes(grid, pad_factor)
    dk_area = (kx[1] - kx[0]) * (ky[1] - ky[0])
    raw = np.zeros((len(ky), len(kx)))
    kept = {} if keep_fields else None
    real_norms, k_norms = {}, {}
    for l, psi in channels:
        masked = psi * mask
        F = transform(grid, masked, pad_factor)
        P = F.real ** 2 + F.imag ** 2
        raw += P
        real_norms[l] = float(np.sum(np.abs(masked) ** 2) * grid.pixel_area)
        k_norms[l] = float(P.sum() * dk_area)
        if keep_fields:
            kept[l] = F
    blurred = broaden(raw, detector.momentum_broadening_sigma, kx[1] - kx[0], ky[1] - ky[0])
    meta = {"pad_factor": pad_factor, "real_norms": real_norms, "k_norms": k_norms,
            "broadening_sigma_per_m": detector.momentum_broadening_sigma,
            "film_intensity_transmissivity": detector.film_intensity_transmissivity,
            "aperture_radius_m": detector.aperture_radius_image_plane}
    return kx, ky, raw, blurred, kept, meta


def far_field(sidebands: SidebandSet, detector: DetectorModel = DetectorModel(),
              geometry: HoleGeometry = HoleGeometry(), pad_factor: int = 2,
              orders=None, keep_fields: bool = False) -> FarFieldMap:
    """Fourier-plane intensity I_F = sum_l |Psi_l|^2, then broadened.

    ``orders`` restricts the incoherent sum (default: all orders in the set).
    Channels are accumulated in ascending order, so results are bit-stable.
    """
    if orders is None:
        orders = [int(l) for l in sidebands.orders]
    mask = transmission_mask(sidebands.grid, geometry, detector)
    channels = ((int(l), sidebands[int(l)]) for l in sorted(orders))
    kx, ky, raw, blurred, kept, meta = _propagate(sidebands.grid, channels, mask, detector,
                                                  pad_factor, keep_fields)
    return FarFieldMap(kx, ky, blurred, raw, tuple(sorted(int(l) for l in orders)), kept, meta)


def spiral_phase_plate_reference(l: int, geom: HoleGeometry, psi_inc: IncidentWavefunction,
                                 detector: DetectorModel = DetectorModel(),
                                 pad_factor: int = 2, keep_fields: bool = False) -> FarFieldMap:
    """Far field behind a spiral phase plate of order ``l`` filling the hole.

    psi_ref = psi_inc exp(i l phi) inside the hole and psi_inc on the film,
    after which the usual film/aperture mask applies.
    """
    R, phi = psi_inc.grid.polar(geom.center)
    plate = np.where(R < geom.radius, np.exp(1j * l * phi), 1.0 + 0j)
    if l != 0:
        plate[R == 0] = 0.0  # the core pixel has no defined phase
    mask = transmission_mask(psi_inc.grid, geom, detector)
    kx, ky, raw, blurred, kept, meta = _propagate(
        psi_inc.grid, [(int(l), psi_inc.values * plate)], mask, detector, pad_factor, keep_fields)
    meta["reference"] = f"spiral phase plate, order {l}"
    return FarFieldMap(kx, ky, blurred, raw, (int(l),), kept, meta)


def line_profile(ffmap: FarFieldMap, axis: str = "horizontal", raw: bool = False) -> np.ndarray:
    """Intensity along k_y = 0 (horizontal) or k_x = 0 (vertical)."""
    img = ffmap.raw if raw else ffmap.intensity
    ix, iy = ffmap.center_index
    if axis == "horizontal":
        return img[iy, :].copy()
    if axis == "vertical":
        return img[:, ix].copy()
    raise DomainError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")


def radial_profile(ffmap: FarFieldMap, raw: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Azimuthal mean of the intensity in rings one k-pixel wide."""
    img = ffmap.raw if raw else ffmap.intensity
    dk = min(ffmap.dkx, ffmap.dky)
    KR = np.hypot(ffmap.kx[None, :], ffmap.ky[:, None])
    idx = np.rint(KR / dk).astype(np.intp).ravel()
    n = int(min(len(ffmap.kx), len(ffmap.ky)) // 2)
    sums = np.bincount(idx, img.ravel())[:n]
    counts = np.bincount(idx)[:n]
    return np.arange(n) * dk, sums / np.maximum(counts, 1)


def peak_radius(ffmap: FarFieldMap, raw: bool = False) -> float:
    """Radius (1/m) of the maximum of the radial profile, parabolic sub-bin refinement."""
    k, prof = radial_profile(ffmap, raw)
    j = int(np.argmax(prof))
    if 0 < j < len(prof) - 1:
        a, b, c = prof[j - 1], prof[j], prof[j + 1]
        den = a - 2 * b + c
        off = 0.5 * (a - c) / den if den != 0 else 0.0
        return float((j + off) * (k[1] - k[0]))
    return float(k[j])


def small_angle_fraction(ffmap: FarFieldMap, part: np.ndarray, k_max: float) -> float:
    """Share of the intensity within |k| < k_max contributed by ``part``."""
    KR = np.hypot(ffmap.kx[None, :], ffmap.ky[:, None])
    inside = KR < k_max
    total = ffmap.intensity[inside].sum()
    return float(part[inside].sum() / total) if total > 0 else 0.0
