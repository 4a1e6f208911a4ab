"""Magnetic moment of a composite particle moving in an OAM state.

The charge current is the internal charge density convolved with the
probability current of a Laguerre-Gauss ring. Moments are returned in units
of q hbar / 2m (the nuclear magneton for a proton). Working in units with
hbar / m = 1 the azimuthal probability current is ``l |psi|^2 / R``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import constants as sc
from scipy.special import k1

from .errors import DomainError, ResolutionError

PROTON_RMS_RADIUS = 0.84e-15
PROFILES = ("exponential", "gaussian")
METHODS = ("projected", "grid3d")
DEFAULT_RESOLUTION = {"projected": 512, "grid3d": 256}
CONVERGENCE_TOL = 1e-3
# pixels per waist (fine grid) below which the ring current is not resolved
MIN_POINTS_PER_WAIST = 8.0


@dataclass(frozen=True)
class ProtonModel:
    mass: float = sc.m_p
    charge: float = sc.e
    rms_charge_radius: float = PROTON_RMS_RADIUS
    density_profile: str = "exponential"

    def __post_init__(self):
        if self.rms_charge_radius < 0:
            raise DomainError("rms_charge_radius must be >= 0")
        if self.density_profile not in PROFILES:
            raise DomainError(f"density_profile must be one of {PROFILES}")
        if not self.mass > 0:
            raise DomainError("mass must be positive")

    @property
    def nuclear_magneton(self) -> float:
        return sc.e * sc.hbar / (2.0 * self.mass)

    @property
    def length_scale(self) -> float:
        """Exponential decay length a = rms/sqrt(12) or Gaussian sigma = rms/sqrt(3)."""
        div = math.sqrt(12.0) if self.density_profile == "exponential" else math.sqrt(3.0)
        return self.rms_charge_radius / div

    def density_3d(self, r: np.ndarray) -> np.ndarray:
        """Unit-integral charge density (per m^3) at radius ``r``."""
        a = self.length_scale
        if self.density_profile == "exponential":
            return np.exp(-r / a) / (8.0 * np.pi * a ** 3)
        return np.exp(-0.5 * (r / a) ** 2) / ((2.0 * np.pi) ** 1.5 * a ** 3)

    def density_projected(self, s: np.ndarray) -> np.ndarray:
        """Density integrated along z (per m^2) at transverse distance ``s``."""
        a = self.length_scale
        if self.density_profile == "gaussian":
            return np.exp(-0.5 * (s / a) ** 2) / (2.0 * np.pi * a ** 2)
        s = np.asarray(s, dtype=np.float64)
        out = np.full(s.shape, 1.0 / (4.0 * np.pi * a ** 2))
        nz = s > 0
        x = s[nz] / a
        out[nz] = x * k1(x) / (4.0 * np.pi * a ** 2)
        return out


@dataclass(frozen=True)
class OAMWavefunction:
    """Lowest Laguerre-Gauss ring, |psi|^2 ~ R^(2|l|) exp(-2 R^2 / w^2)."""

    l: int
    waist: float

    def __post_init__(self):
        if not self.waist > 0:
            raise DomainError("waist must be positive")
        if int(self.l) != self.l:
            raise DomainError("l must be an integer")

    def density(self, R: np.ndarray) -> np.ndarray:
        """Continuum-normalised |psi(R)|^2 (per m^2)."""
        n = abs(int(self.l))
        w = self.waist
        norm = 2.0 ** (n + 1) / (math.pi * math.factorial(n) * w ** (2 * n + 2))
        return norm * R ** (2 * n) * np.exp(-2.0 * R ** 2 / w ** 2)


class MomentResult(NamedTuple):
    """Reduced moment with its refinement check.

    ``defect`` is |mu(n) - mu(n/2)| / max(|mu(n)|, 1).
    """

    mu_over_muN: float
    defect: float
    resolution: int
    method: str


def _extent(model: ProtonModel, wf: OAMWavefunction) -> tuple[float, float]:
    """Half-widths (transverse, longitudinal) of the quadrature box."""
    rho_reach = 12.0 * model.length_scale
    ring_reach = (1.0 + 0.5 * math.sqrt(abs(wf.l))) * 3.5 * wf.waist
    return ring_reach + rho_reach, max(rho_reach, 1e-3 * wf.waist)


def _ring_current(wf: OAMWavefunction, n: int, half: float):
    d = 2.0 * half / n
    x = (np.arange(n) - n // 2) * d
    X, Y = np.meshgrid(x, x, indexing="xy")
    R2 = X ** 2 + Y ** 2
    dens = wf.density(np.sqrt(R2))
    dens /= dens.sum() * d * d
    with np.errstate(divide="ignore", invalid="ignore"):
        jphi_over_r = np.where(R2 > 0, wf.l * dens / R2, 0.0)
    return X, Y, -Y * jphi_over_r, X * jphi_over_r, d


def _kernel_weights(values: np.ndarray) -> np.ndarray:
    s = values.sum()
    if not s > 0:
        raise ResolutionError("charge density not sampled by the grid")
    return values / s


def _moment_projected(model: ProtonModel, wf: OAMWavefunction, n: int) -> float:
    half, _ = _extent(model, wf)
    X, Y, jx, jy, d = _ring_current(wf, n, half)
    if model.rms_charge_radius == 0:
        cx, cy = jx, jy
    else:
        K = _kernel_weights(model.density_projected(np.hypot(X, Y)))
        Kf = np.fft.rfft2(np.fft.ifftshift(K))
        cx = np.fft.irfft2(np.fft.rfft2(jx) * Kf, s=jx.shape)
        cy = np.fft.irfft2(np.fft.rfft2(jy) * Kf, s=jy.shape)
    return float(np.sum(X * cy - Y * cx) * d * d)


def _moment_grid3d(model: ProtonModel, wf: OAMWavefunction, n: int) -> float:
    half, half_z = _extent(model, wf)
    X, Y, jx, jy, d = _ring_current(wf, n, half)
    if model.rms_charge_radius == 0:
        return float(np.sum(X * jy - Y * jx) * d * d)
    dz = 2.0 * half_z / n
    z = (np.arange(n) - n // 2) * dz
    r = np.sqrt(X[None] ** 2 + Y[None] ** 2 + z[:, None, None] ** 2)
    K = _kernel_weights(model.density_3d(r))
    del r
    Kf = np.fft.rfftn(np.fft.ifftshift(K))
    del K
    # longitudinally uniform current on a periodic box
    ones = np.ones((n, 1, 1))
    cx = np.fft.irfftn(np.fft.rfftn(ones * jx) * Kf, s=(n, n, n), axes=(0, 1, 2))[n // 2]
    cy = np.fft.irfftn(np.fft.rfftn(ones * jy) * Kf, s=(n, n, n), axes=(0, 1, 2))[n // 2]
    return float(np.sum(X * cy - Y * cx) * d * d)


def magnetic_moment(model: ProtonModel, wf: OAMWavefunction, method: str = "projected",
                    resolution: int | None = None, tol: float = CONVERGENCE_TOL) -> MomentResult:
    """mu_z / mu_N = (1/2) int (r x j)_z d^3r for j = rho (*) J_prob.

    ``projected`` integrates the density along z analytically and convolves
    in 2D; ``grid3d`` performs the full 3D FFT convolution on an n^3 box with
    a current that is uniform along z. Each result is recomputed at n/2 and
    the relative change must stay below ``tol``.
    """
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}")
    n = DEFAULT_RESOLUTION[method] if resolution is None else int(resolution)
    if n < 32 or n % 4:
        raise DomainError("resolution must be a multiple of 4 and >= 32")
    if wf.l == 0:
        return MomentResult(0.0, 0.0, n, method)
    half, _ = _extent(model, wf)
    pts = wf.waist / (2.0 * half / n)
    if pts < MIN_POINTS_PER_WAIST:
        raise ResolutionError(
            f"waist spans {pts:.2f} pixels at n = {n}; need {MIN_POINTS_PER_WAIST}")
    fn = _moment_projected if method == "projected" else _moment_grid3d
    fine = fn(model, wf, n)
    coarse = fn(model, wf, n // 2)
    defect = abs(fine - coarse) / max(abs(fine), 1.0)
    if defect > tol:
        raise ResolutionError(f"refinement changed mu by {defect:.3g} (tol {tol:g})")
    scale = model.charge / sc.e
    return MomentResult(fine * scale, defect, n, method)


def moment_vs_waist_sweep(model: ProtonModel, l: int, waists, method: str = "projected",
                          resolution: int | None = None) -> np.ndarray:
    """Rows of (waist, mu_z / mu_N) for increasing waists."""
    w = np.asarray(waists, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("waists must be a non-empty 1-D sequence")
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise DomainError("waists must be positive and strictly increasing")
    mu = [magnetic_moment(model, OAMWavefunction(int(l), float(x)), method, resolution).mu_over_muN
          for x in w]
    return np.column_stack([w, mu])
