"""Constants, light and electron-beam descriptions, SPP dispersion.

Every other module consumes the immutable value types defined here.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

from scipy import constants as sc

from .errors import DomainError, PoleError

C_LIGHT = sc.c
HBAR = sc.hbar
E_CHARGE = sc.e
ELECTRON_REST_ENERGY_EV = sc.physical_constants["electron mass energy equivalent in MeV"][0] * 1e6

# Stand-in optical constants near 790 nm (not published with the experiment).
DEFAULT_EPS_METAL = complex(-29.0, 0.3)
DEFAULT_EPS_DIELECTRIC = 4.0
DEFAULT_SPP_DECAY_LENGTH = 10e-6


def relativistic_speed(kinetic_energy_ev: float) -> float:
    """Speed of an electron with the given kinetic energy in eV."""
    if not kinetic_energy_ev > 0:
        raise DomainError(f"kinetic energy must be positive, got {kinetic_energy_ev!r}")
    rest = ELECTRON_REST_ENERGY_EV
    # c*sqrt(1 - (rest/(rest+E))^2) rearranged to avoid cancellation at low E
    return C_LIGHT * math.sqrt(kinetic_energy_ev * (kinetic_energy_ev + 2.0 * rest)) / (
        kinetic_energy_ev + rest)


@dataclass(frozen=True)
class ElectronBeam:
    """Probe electrons: kinetic energy in eV, coherence length in m."""

    kinetic_energy: float = 200e3
    transverse_coherence: float = 0.85e-6
    velocity: float = field(init=False)

    def __post_init__(self):
        if not self.transverse_coherence > 0:
            raise DomainError("transverse_coherence must be positive")
        object.__setattr__(self, "velocity", relativistic_speed(self.kinetic_energy))


def derive_electron_velocity(beam: ElectronBeam) -> float:
    """Relativistic speed (m/s) of ``beam``; equal to ``beam.velocity``."""
    return relativistic_speed(beam.kinetic_energy)


@dataclass(frozen=True)
class PolarizationState:
    """Circular-basis amplitudes of the light field.

    ``a_plus`` weights the sigma = +1 component, which launches plasmons with
    azimuthal phase exp(+i phi); ``a_minus`` the sigma = -1 component.
    """

    a_plus: complex
    a_minus: complex

    @classmethod
    def circular(cls, sigma: int) -> "PolarizationState":
        if sigma not in (1, -1):
            raise DomainError("sigma must be +1 or -1")
        return cls(1.0 + 0j, 0j) if sigma == 1 else cls(0j, 1.0 + 0j)

    @classmethod
    def linear(cls, angle: float = 0.0) -> "PolarizationState":
        """Linear polarisation at ``angle`` (rad) from the x axis."""
        return jones_to_circular(math.cos(angle), math.sin(angle))

    @classmethod
    def elliptical(cls, chi: float, major_axis_angle: float = 0.0) -> "PolarizationState":
        """Ellipticity angle ``chi`` with major axis rotated by ``major_axis_angle``."""
        jx, jy = math.cos(chi), 1j * math.sin(chi)
        c, s = math.cos(major_axis_angle), math.sin(major_axis_angle)
        return jones_to_circular(c * jx - s * jy, s * jx + c * jy)

    @property
    def norm2(self) -> float:
        return abs(self.a_plus) ** 2 + abs(self.a_minus) ** 2

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def normalized(self) -> "PolarizationState":
        n = math.sqrt(self.norm2)
        if n == 0:
            raise DomainError("zero polarization vector")
        return PolarizationState(self.a_plus / n, self.a_minus / n)

    def swapped(self) -> "PolarizationState":
        return PolarizationState(self.a_minus, self.a_plus)

    @property
    def kind(self) -> str:
        p, m = abs(self.a_plus), abs(self.a_minus)
        tol = 1e-12 * max(p, m, 1.0)
        if p <= tol or m <= tol:
            return "circular"
        if abs(p - m) <= tol:
            return "linear"
        return "elliptical"

    def stokes(self) -> tuple[float, float, float, float]:
        """Stokes parameters (S0, S1, S2, S3) with S3 = |a+|^2 - |a-|^2."""
        jx, jy = self.jones()
        s0 = abs(jx) ** 2 + abs(jy) ** 2
        s1 = abs(jx) ** 2 - abs(jy) ** 2
        s2 = 2.0 * (jx.conjugate() * jy).real
        s3 = 2.0 * (jx.conjugate() * jy).imag
        return s0, s1, s2, s3

    @property
    def ellipticity_angle(self) -> float:
        s0, _, _, s3 = self.stokes()
        return 0.5 * math.asin(max(-1.0, min(1.0, s3 / s0)))

    def jones(self) -> tuple[complex, complex]:
        """Inverse of :func:`jones_to_circular`."""
        r = 1.0 / math.sqrt(2.0)
        jx = r * (self.a_plus + self.a_minus)
        jy = 1j * r * (self.a_plus - self.a_minus)
        return jx, jy


def jones_to_circular(jones_x: complex, jones_y: complex) -> PolarizationState:
    """Decompose a Jones vector into normalised circular amplitudes.

    a_plus = (jx - i jy)/sqrt(2), a_minus = (jx + i jy)/sqrt(2).
    """
    jx, jy = complex(jones_x), complex(jones_y)
    if jx == 0 and jy == 0:
        raise DomainError("zero Jones vector has no polarization")
    r = 1.0 / math.sqrt(2.0)
    return PolarizationState(r * (jx - 1j * jy), r * (jx + 1j * jy)).normalized()


@dataclass(frozen=True)
class IncidentLight:
    """Quasi-monochromatic drive. Energies in eV, angles in rad, field in V/m."""

    photon_energy: float = 1.57
    field_amplitude: float = 8e7
    polarization: PolarizationState = field(default_factory=lambda: PolarizationState.circular(1))
    incidence_angle_delta: float = math.radians(4.5)
    sample_tilt_alpha: float = math.radians(4.5)

    def __post_init__(self):
        if not self.photon_energy > 0:
            raise DomainError("photon_energy must be positive")

    @property
    def angular_frequency(self) -> float:
        return self.photon_energy * E_CHARGE / HBAR

    @property
    def vacuum_wavelength(self) -> float:
        return 2.0 * math.pi * C_LIGHT / self.angular_frequency

    @property
    def optical_period(self) -> float:
        return 2.0 * math.pi / self.angular_frequency

    @property
    def vacuum_wavenumber(self) -> float:
        return self.angular_frequency / C_LIGHT

    def with_polarization(self, polarization: PolarizationState) -> "IncidentLight":
        return replace(self, polarization=polarization)


@dataclass(frozen=True)
class MaterialStack:
    """Metal film on a dielectric membrane at the drive frequency.

    ``spp_decay_length`` (m) is the amplitude 1/e length of the SPP; when set it
    replaces the imaginary part of the dispersion-derived wavenumber. ``None``
    keeps the intrinsic loss from ``eps_metal``.
    """

    eps_metal: complex = DEFAULT_EPS_METAL
    eps_dielectric: float = DEFAULT_EPS_DIELECTRIC
    spp_decay_length: float | None = DEFAULT_SPP_DECAY_LENGTH


def derive_spp_wavevector(light: IncidentLight, stack: MaterialStack) -> complex:
    """Complex SPP wavenumber (1/m) on the metal/dielectric interface.

    k = (w/c) sqrt(eps_m eps_d / (eps_m + eps_d)) on the principal branch
    (Re k >= 0, forward propagation).

    Raises
    ------
    PoleError
        eps_metal + eps_dielectric == 0.
    DomainError
        No bound mode: Re(eps_metal) >= -eps_dielectric, or eps_dielectric <= 0.
    """
    em = complex(stack.eps_metal)
    ed = float(stack.eps_dielectric)
    if em + ed == 0:
        raise PoleError("eps_metal + eps_dielectric = 0")
    if not ed > 0:
        raise DomainError("eps_dielectric must be positive")
    if not em.real < -ed:
        raise DomainError(
            f"no bound SPP: Re(eps_metal)={em.real} must be below -eps_dielectric={-ed}")
    k = light.vacuum_wavenumber * cmath.sqrt(em * ed / (em + ed))
    if k.real < 0:
        k = -k
    if stack.spp_decay_length is not None:
        if not stack.spp_decay_length > 0:
            raise DomainError("spp_decay_length must be positive")
        k = complex(k.real, 1.0 / stack.spp_decay_length)
    return k


def spp_wavelength(k_spp: complex) -> float:
    return 2.0 * math.pi / k_spp.real
