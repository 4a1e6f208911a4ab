"""Analytic interaction field beta(x, y) around a circular nanohole.

Outside the hole the field is a reference term A plus a cylindrical SPP wave
launched at the rim; inside it is a J1 standing near field whose azimuthal
structure follows the circular components of the drive. A is applied only
outside because the film reflects the light while the hole is open.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import j1

from .errors import DomainError, ShapeError
from .optics import IncidentLight, MaterialStack, PolarizationState, derive_spp_wavevector

log = logging.getLogger(__name__)

# |J1(Re k * radius)| below this puts the rim on a Bessel zero
_RIM_J1_FLOOR = 1e-6


@dataclass(frozen=True)
class HoleGeometry:
    radius: float = 0.4e-6
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("hole radius must be positive")


@dataclass(frozen=True)
class Grid2D:
    """Regular pixel grid; ``extent_*`` are half-widths in metres.

    Pixel ``i`` sits at ``(i - n/2) * d`` so the grid origin is an exact pixel
    at index ``(ny//2, nx//2)``. Arrays are indexed ``[iy, ix]``.
    """

    nx: int
    ny: int
    extent_x: float
    extent_y: float

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if n < 16 or n % 2:
                raise DomainError(f"{name} must be even and >= 16, got {n}")
        if not (self.extent_x > 0 and self.extent_y > 0):
            raise DomainError("grid extents must be positive")

    @classmethod
    def square(cls, n: int, extent: float) -> "Grid2D":
        return cls(n, n, extent, extent)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def dx(self) -> float:
        return 2.0 * self.extent_x / self.nx

    @property
    def dy(self) -> float:
        return 2.0 * self.extent_y / self.ny

    @property
    def pixel_area(self) -> float:
        return self.dx * self.dy

    @property
    def center_index(self) -> tuple[int, int]:
        """(ix, iy) of the origin pixel."""
        return self.nx // 2, self.ny // 2

    @cached_property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    def polar(self, center: tuple[float, float] = (0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        """Radius and azimuth of every pixel about ``center``."""
        X = self.x[None, :] - center[0]
        Y = self.y[:, None] - center[1]
        X, Y = np.broadcast_arrays(X, Y)
        return np.hypot(X, Y), np.arctan2(Y, X)

    def to_pixel(self, x: float, y: float) -> tuple[float, float]:
        """Fractional (ix, iy) of a physical point."""
        return x / self.dx + self.nx // 2, y / self.dy + self.ny // 2

    def inscribed_radius(self, center: tuple[float, float] = (0.0, 0.0)) -> float:
        """Largest circle about ``center`` whose bilinear samples stay on the grid."""
        x_lo = self.x[0] - center[0]
        x_hi = self.x[-1] - center[0]
        y_lo = self.y[0] - center[1]
        y_hi = self.y[-1] - center[1]
        return min(-x_lo, x_hi, -y_lo, y_hi)

    def require_same(self, other: "Grid2D") -> None:
        if self != other:
            raise ShapeError(f"grid mismatch: {self} vs {other}")


@dataclass(frozen=True, eq=False)
class InteractionField:
    """Complex coupling beta on a grid plus the parameters that produced it.

    ``A``, ``B`` and ``k_spp`` are ``None`` for fields imported from a file.
    """

    grid: Grid2D
    values: np.ndarray
    A: complex | None = None
    B: complex | None = None
    k_spp: complex | None = None
    geometry: HoleGeometry | None = None
    polarization: PolarizationState | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ShapeError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("interaction field contains non-finite values")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        """arg(beta); 0 where beta vanishes (vortex cores)."""
        return np.angle(self.values)

    def scaled(self, factor: complex) -> "InteractionField":
        return InteractionField(self.grid, self.values * factor, self.A, self.B, self.k_spp,
                                self.geometry, self.polarization, dict(self.meta))


@dataclass(frozen=True)
class PulsePair:
    """Two phase-locked pulses; ``delay`` and ``envelope_fwhm`` in seconds."""

    pol_1: PolarizationState
    pol_2: PolarizationState
    rel_amplitude_2: float = 1.0
    delay: float = 0.0
    envelope_fwhm: float = 55e-15

    def __post_init__(self):
        if not self.envelope_fwhm > 0:
            raise DomainError("envelope_fwhm must be positive")

    def at(self, delay: float) -> "PulsePair":
        return PulsePair(self.pol_1, self.pol_2, self.rel_amplitude_2, delay, self.envelope_fwhm)


@dataclass(frozen=True)
class Preset:
    b: complex
    b_over_a: float | None  # None: no reference term


# B sets the rim amplitude of the SPP term; the interior is enhanced by
# 1/|J1(k a)| (about 21 for the default stack), so 0.25 reaches 2|beta| ~ 6.
PRESETS = {
    "holography": Preset(b=0.25, b_over_a=1.0),
    "vortex_detection": Preset(b=0.25, b_over_a=None),
}


def reference_amplitude_from_geometry(light: IncidentLight, preset: str = "holography",
                                      b: complex | None = None,
                                      b_over_a: float | None = None) -> complex:
    """Reference amplitude A for a named illumination geometry.

    ``holography`` returns a real A with ``|B/A| = b_over_a`` (default 1);
    ``vortex_detection`` returns 0, the tilt at which the electron-light
    coupling vanishes. The tilt-to-A mapping itself is not modelled.
    """
    if preset not in PRESETS:
        raise DomainError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    p = PRESETS[preset]
    if p.b_over_a is None:
        return 0j
    b = p.b if b is None else b
    ratio = p.b_over_a if b_over_a is None else b_over_a
    if not ratio > 0:
        raise DomainError("b_over_a must be positive")
    if not math.isclose(light.sample_tilt_alpha, light.incidence_angle_delta, abs_tol=1e-9):
        log.warning("holography preset assumes normal incidence (alpha = delta)")
    return complex(abs(b) / ratio)


def _beta_values(grid: Grid2D, geom: HoleGeometry, k_spp: complex,
                 pol: PolarizationState, A: complex, B: complex) -> np.ndarray:
    R, phi = grid.polar(geom.center)
    a = geom.radius
    ang = pol.a_plus * np.exp(1j * phi) + pol.a_minus * np.exp(-1j * phi)
    out = np.empty(grid.shape, dtype=np.complex128)
    outside = R >= a
    Ro = R[outside]
    out[outside] = A + B * np.exp(1j * k_spp * (Ro - a)) * np.sqrt(a / Ro) * ang[outside]
    kr = k_spp.real
    rim = j1(kr * a)
    if abs(rim) < _RIM_J1_FLOOR:
        raise DomainError(f"hole rim sits on a zero of J1 (Re k * radius = {kr * a:.6g})")
    # continuity of the SPP term across the rim
    out[~outside] = (B / rim) * j1(kr * R[~outside]) * ang[~outside]
    return out


def synthesize_beta(geom: HoleGeometry, grid: Grid2D, light: IncidentLight,
                    stack: MaterialStack, A: complex, B: complex) -> InteractionField:
    """Interaction field for single-pulse illumination with ``light.polarization``.

    Outside (R >= radius)::

        beta = A + B sum_s a_s exp(i k (R - radius)) sqrt(radius / R) exp(i s phi)

    Inside::

        beta = B / J1(Re k radius) * sum_s a_s J1(Re k R) exp(i s phi)

    ``k`` is the complex SPP wavenumber so material damping enters through
    its imaginary part. The hole centre is an exact zero.
    """
    pol = light.polarization
    if not pol.is_normalized():
        raise DomainError(f"polarization not normalized (|a+|^2+|a-|^2 = {pol.norm2})")
    if min(grid.extent_x, grid.extent_y) < 2.0 * geom.radius:
        raise DomainError("grid half-width must be at least twice the hole radius")
    k = derive_spp_wavevector(light, stack)
    values = _beta_values(grid, geom, k, pol, complex(A), complex(B))
    meta = {"near_field_model": "analytic J1 interior / cylindrical SPP exterior"}
    return InteractionField(grid, values, complex(A), complex(B), k, geom, pol, meta)


def superpose_fields(field_1: InteractionField, field_2: InteractionField,
                     delay: float, angular_frequency: float,
                     weight: float = 1.0) -> InteractionField:
    """beta_1 + weight * beta_2 * exp(i w delay) for fields on a shared grid."""
    field_1.grid.require_same(field_2.grid)
    values = field_1.values + weight * field_2.values * np.exp(1j * angular_frequency * delay)
    meta = dict(field_1.meta, delay=delay, envelope_weight=weight)
    return InteractionField(field_1.grid, values, field_1.A, field_1.B, field_1.k_spp,
                            field_1.geometry, field_1.polarization, meta)


def second_pulse_field(field_1: InteractionField, pulse: PulsePair,
                       second_reference: bool = True) -> InteractionField:
    """Field launched by the second pulse alone, on the grid of ``field_1``.

    With ``second_reference=False`` the second pulse contributes only its SPP
    term, as when the light pulses no longer overlap the electron in time.
    """
    if field_1.geometry is None or field_1.k_spp is None:
        raise DomainError("first-pulse field lacks synthesis parameters")
    pol = pulse.pol_2
    if not pol.is_normalized():
        raise DomainError("second-pulse polarization not normalized")
    r = pulse.rel_amplitude_2
    A2 = field_1.A * r if second_reference else 0j
    values = _beta_values(field_1.grid, field_1.geometry, field_1.k_spp, pol, A2, field_1.B * r)
    return InteractionField(field_1.grid, values, A2, field_1.B * r, field_1.k_spp,
                            field_1.geometry, pol, dict(field_1.meta))


def envelope_weight(delay: float, envelope_fwhm: float) -> float:
    """Gaussian overlap of two pulse envelopes separated by ``delay``."""
    return math.exp(-delay ** 2 * 4.0 * math.log(2.0) / (2.0 * envelope_fwhm ** 2))


def superpose_two_pulses(field_1: InteractionField, pulse: PulsePair, light: IncidentLight,
                         envelope_overlap: bool = False,
                         second_reference: bool = True) -> InteractionField:
    """Total field of a phase-locked pulse pair at delay ``pulse.delay``.

    The default model adds the two fields as phasors (weight 1). With
    ``envelope_overlap=True`` the second field is attenuated by the Gaussian
    overlap of the two envelopes.
    """
    field_2 = second_pulse_field(field_1, pulse, second_reference)
    w = envelope_weight(pulse.delay, pulse.envelope_fwhm) if envelope_overlap else 1.0
    return superpose_fields(field_1, field_2, pulse.delay, light.angular_frequency, w)
