"""Observables extracted from fields and maps.

Azimuthal decompositions sample circles with 512 bilinear points by default
and integrate radially with the trapezoid rule on a pixel-spaced radius set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks, lombscargle

from . import kernels
from .errors import (ChiralPinemError, DegenerateError, DomainError,
                     InsufficientFringesError, UnreliableLoopError)
from .nearfield import (Grid2D, HoleGeometry, InteractionField, PulsePair,
                        envelope_weight, second_pulse_field, superpose_fields, synthesize_beta)
from .optics import ElectronBeam, IncidentLight, MaterialStack
from .pinem import (build_sidebands, energy_filtered_map, gaussian_wavefunction, lmax_rule)
from .sampling import RadialCut, bilinear

N_PHI = 512
DEFAULT_HELICITY_ANNULUS = (0.1e-6, 0.35e-6)
LOOP_THRESHOLD = 1e-3


def _ring_samples(field, grid: Grid2D, radii: np.ndarray, n_phi: int,
                  center: tuple[float, float]) -> np.ndarray:
    if callable(field):
        ang = 2.0 * np.pi * np.arange(n_phi) / n_phi
        x = center[0] + radii[:, None] * np.cos(ang)[None, :]
        y = center[1] + radii[:, None] * np.sin(ang)[None, :]
        return np.asarray(field(x, y), dtype=np.complex128)
    values = np.asarray(field)
    if values.shape != grid.shape:
        raise DomainError(f"field shape {values.shape} does not match grid {grid.shape}")
    cx, cy = grid.to_pixel(*center)
    if math.isclose(grid.dx, grid.dy, rel_tol=1e-12):
        return kernels.ring_sample(values.astype(np.complex128, copy=False), cx, cy,
                                   radii / grid.dx, n_phi)
    ang = 2.0 * np.pi * np.arange(n_phi) / n_phi
    px = cx + radii[:, None] * np.cos(ang)[None, :] / grid.dx
    py = cy + radii[:, None] * np.sin(ang)[None, :] / grid.dy
    return bilinear(values.astype(np.complex128, copy=False), px, py)


@dataclass(frozen=True, eq=False)
class OAMSpectrum:
    """Normalised azimuthal power ``powers[i]`` at charge ``ms[i]``."""

    ms: np.ndarray
    powers: np.ndarray
    r_min: float
    r_max: float

    def power(self, m: int) -> float:
        hit = np.flatnonzero(self.ms == m)
        return float(self.powers[hit[0]]) if hit.size else 0.0

    def dominant(self) -> int:
        return int(self.ms[np.argmax(self.powers)])

    def as_dict(self, floor: float = 0.0) -> dict[int, float]:
        return {int(m): float(p) for m, p in zip(self.ms, self.powers) if p > floor}


def oam_spectrum(field, grid: Grid2D, r_min: float | None = None, r_max: float | None = None,
                 n_phi: int = N_PHI, center: tuple[float, float] = (0.0, 0.0)) -> OAMSpectrum:
    """Azimuthal power spectrum P_m of a complex field.

    c_m(R) = (1/2pi) closed-loop integral of field exp(-i m phi), evaluated by
    FFT over ``n_phi`` samples per circle; P_m = int |c_m|^2 R dR normalised
    over all m. Omitting both radii integrates over the full inscribed disc,
    giving them restricts to that annulus.

    ``field`` is either an array on ``grid`` (sampled bilinearly) or a
    callable ``f(x, y)`` evaluated exactly on the circles.
    """
    dr = min(grid.dx, grid.dy)
    lo = 0.0 if r_min is None else float(r_min)
    limit = grid.inscribed_radius(center)
    hi = limit if r_max is None else float(r_max)
    if not hi > lo >= 0:
        raise DomainError(f"bad radial range [{lo}, {hi}]")
    if hi > limit * (1 + 1e-12):
        raise DomainError(f"radius {hi} leaves the grid (max {limit})")
    radii = lo + np.arange(int(math.floor((hi - lo) / dr + 1e-9)) + 1) * dr
    if radii.size < 2:
        radii = np.array([lo, hi])
    samples = _ring_samples(field, grid, radii, n_phi, center)
    coeffs = np.fft.fft(samples, axis=1) / n_phi
    ms = np.rint(np.fft.fftfreq(n_phi, 1.0 / n_phi)).astype(int)
    weight = np.abs(coeffs) ** 2 * radii[:, None]
    per_m = trapezoid(weight, radii, axis=0)
    total = per_m.sum()
    if not total > 0:
        raise DomainError("field vanishes on the sampled region")
    order = np.argsort(ms)
    return OAMSpectrum(ms[order], per_m[order] / total, float(radii[0]), float(radii[-1]))


class ChargeResult(NamedTuple):
    charge: int
    winding: float
    residual: float


def topological_charge(field, grid: Grid2D, loop_radius: float, n_phi: int = N_PHI,
                       threshold: float = LOOP_THRESHOLD,
                       center: tuple[float, float] = (0.0, 0.0)) -> ChargeResult:
    """Integer phase winding of ``field`` around a circle.

    Each step takes the nearest-branch phase increment, so the loop must keep
    the modulus above ``threshold`` times the field maximum (grid maximum for
    arrays, loop maximum for callables).
    """
    ring = _ring_samples(field, grid, np.array([float(loop_radius)]), n_phi, center)[0]
    ref = float(np.abs(ring).max()) if callable(field) else float(np.abs(field).max())
    mod = np.abs(ring)
    if ref == 0 or mod.min() < threshold * ref:
        raise UnreliableLoopError(
            f"field modulus {mod.min():.3g} below {threshold:g} x max on loop R={loop_radius:g}")
    steps = np.angle(np.roll(ring, -1) * np.conj(ring))
    winding = float(steps.sum() / (2.0 * np.pi))
    charge = int(round(winding))
    return ChargeResult(charge, winding, abs(winding - charge))


def helicity_of_field(beta: InteractionField,
                      annulus: tuple[float, float] = DEFAULT_HELICITY_ANNULUS) -> float:
    """h = (P_{+1} - P_{-1}) / (P_{+1} + P_{-1}) over the annulus."""
    center = beta.geometry.center if beta.geometry is not None else (0.0, 0.0)
    if not np.any(beta.values):
        raise DegenerateError("beta vanishes everywhere")
    try:
        spectrum = oam_spectrum(beta.values, beta.grid, annulus[0], annulus[1], center=center)
    except DomainError as err:
        if "vanishes" in str(err):
            raise DegenerateError("beta vanishes in the helicity annulus") from None
        raise
    p, m = spectrum.power(1), spectrum.power(-1)
    if p + m == 0:
        raise DegenerateError("no m = +-1 content in the helicity annulus")
    return (p - m) / (p + m)


def fringe_period(intensity_map: np.ndarray, grid: Grid2D, cut: RadialCut,
                  min_prominence: float = 1e-3) -> float:
    """Median spacing (m) between successive intensity maxima along a ray.

    Maxima are kept when their prominence is at least ``min_prominence`` of
    their own height, which tolerates strongly decaying envelopes. Each peak
    is refined by a parabola through its three samples.
    """
    r, v = cut.sample(grid, np.asarray(intensity_map, dtype=np.float64))
    peaks, props = find_peaks(v, prominence=0.0)
    if peaks.size:
        keep = props["prominences"] >= min_prominence * np.abs(v[peaks])
        peaks = peaks[keep & (v[peaks] > 0)]
    if peaks.size < 3:
        raise InsufficientFringesError(f"found {peaks.size} fringe maxima, need 3")
    ds = r[1] - r[0]
    a, b, c = v[peaks - 1], v[peaks], v[peaks + 1]
    den = a - 2 * b + c
    off = np.where(den != 0, 0.5 * (a - c) / np.where(den != 0, den, 1.0), 0.0)
    pos = r[peaks] + off * ds
    return float(np.median(np.diff(pos)))


class OscillationFit(NamedTuple):
    """Fundamental of a periodic fit; ``amplitude``/``phase`` refer to harmonic 1."""

    period: float
    amplitude: float
    phase: float
    offset: float
    rms_residual: float
    harmonics: int = 1


def _harmonic_design(ts: np.ndarray, omega: float, harmonics: int) -> np.ndarray:
    cols = [np.ones_like(ts)]
    for h in range(1, harmonics + 1):
        cols += [np.cos(h * omega * ts), np.sin(h * omega * ts)]
    return np.stack(cols, axis=1)


def _harmonic_lstsq(ts, y, omega, harmonics):
    X = _harmonic_design(ts, omega, harmonics)
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    return coef, y - X @ coef


def fit_oscillation(t: np.ndarray, y: np.ndarray, harmonics: int = 1) -> OscillationFit:
    """Least-squares fit of offset + sum_h [a_h cos(h w t) + b_h sin(h w t)].

    The coefficients are linear and solved exactly for each trial w; w itself
    is refined by a bounded scalar search around the Lomb-Scargle periodogram
    peak (between one cycle per scan and the sampling Nyquist limit).
    Harmonics that would exceed the Nyquist limit are dropped.
    """
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if t.size < 5:
        raise DomainError("need at least 5 samples to fit an oscillation")
    if harmonics < 1:
        raise DomainError("harmonics must be >= 1")
    span = t[-1] - t[0]
    scale = float(np.median(np.diff(t)))  # time unit: one sampling step
    ts = (t - t[0]) / scale
    if np.ptp(y) == 0:
        return OscillationFit(float("nan"), 0.0, 0.0, float(y.mean()), 0.0, 0)
    omegas = np.linspace(2 * np.pi / (span / scale), np.pi, 4000)
    w0 = float(omegas[np.argmax(lombscargle(ts, y - y.mean(), omegas))])
    lo, hi = 0.8 * w0, min(1.2 * w0, np.pi)
    H = max(1, min(int(harmonics), int(np.pi / hi)))
    H = min(H, (t.size - 2) // 2)
    res = minimize_scalar(lambda w: float(np.sum(_harmonic_lstsq(ts, y, w, H)[1] ** 2)),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * w0, "maxiter": 500})
    omega = float(res.x)
    coef, resid = _harmonic_lstsq(ts, y, omega, H)
    a1, b1 = coef[1], coef[2]
    # a cos + b sin = amp cos(w t + phase)
    amp = math.hypot(a1, b1)
    phase = math.atan2(-b1, a1) - omega * t[0] / scale
    phase = float((phase + np.pi) % (2 * np.pi) - np.pi)
    return OscillationFit(float(2 * np.pi / omega * scale), float(amp), phase, float(coef[0]),
                          float(np.sqrt(np.mean(resid ** 2))), H)


def zero_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Linearly interpolated times where ``y`` changes sign."""
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    s = np.sign(y)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    return t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])


def sign_changes_per_cycle(t: np.ndarray, y: np.ndarray, period: float) -> list[int]:
    """Sign changes of ``y`` inside each complete window of length ``period``."""
    t = np.asarray(t, dtype=np.float64)
    crossings = zero_crossings(t, y)
    n = int(math.floor((t[-1] - t[0]) / period + 1e-12))
    return [int(np.count_nonzero((crossings >= t[0] + j * period)
                                 & (crossings < t[0] + (j + 1) * period))) for j in range(n)]


@dataclass(frozen=True)
class DelayScanConfig:
    """Everything a two-pulse delay scan needs besides the delays themselves."""

    pulses: PulsePair
    geometry: HoleGeometry = HoleGeometry()
    grid: Grid2D = Grid2D.square(256, 3e-6)
    light: IncidentLight = IncidentLight()
    stack: MaterialStack = MaterialStack()
    beam: ElectronBeam = ElectronBeam()
    A: complex = 0.25
    B: complex = 0.25
    l_max: int | None = None
    helicity_annulus: tuple[float, float] = DEFAULT_HELICITY_ANNULUS
    fringe_cut: RadialCut | None = None
    filter_orders: tuple[int, ...] | None = None
    envelope_overlap: bool = False
    second_reference: bool = True

    def resolved_fringe_cut(self) -> RadialCut:
        if self.fringe_cut is not None:
            return self.fringe_cut
        a = self.geometry.radius
        limit = self.grid.inscribed_radius(self.geometry.center)
        return RadialCut(0.0, 1.1 * a, min(5.0 * a, limit), self.geometry.center)


@dataclass(frozen=True, eq=False)
class DelayScan:
    """Observables versus delay. Fringe period is NaN where fringes vanish."""

    delays: np.ndarray
    helicity: np.ndarray
    fringe_period: np.ndarray
    intensity: np.ndarray
    maps: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.delays)
        if d.size > 1 and not np.all(np.diff(d) > 0):
            raise DomainError("delays must be strictly increasing")

    def fit_intensity(self, harmonics: int = 3) -> OscillationFit:
        return fit_oscillation(self.delays, self.intensity, harmonics)


def run_delay_scan(config: DelayScanConfig, delays, keep_maps: bool = False) -> DelayScan:
    """Synthesize, scatter and analyse the two-pulse field at every delay.

    Per delay: total beta, sidebands, energy-filtered map; records helicity
    inside the hole, fringe period outside it, and the integrated inelastic
    intensity. Errors are re-raised with the offending delay attached.
    """
    delays = np.asarray(delays, dtype=np.float64)
    if delays.ndim != 1 or delays.size == 0:
        raise DomainError("delays must be a non-empty 1-D sequence")
    if delays.size > 1 and not np.all(np.diff(delays) > 0):
        raise DomainError("delays must be strictly increasing")
    light = config.light.with_polarization(config.pulses.pol_1)
    beta_1 = synthesize_beta(config.geometry, config.grid, light, config.stack,
                             config.A, config.B)
    beta_2 = second_pulse_field(beta_1, config.pulses, config.second_reference)
    psi = gaussian_wavefunction(config.grid, config.beam, center=config.geometry.center)
    l_max = config.l_max
    if l_max is None:
        # one truncation for the whole scan keeps observables exactly periodic
        l_max = lmax_rule(float(beta_1.modulus.max() + beta_2.modulus.max()))
    cut = config.resolved_fringe_cut()
    omega = light.angular_frequency
    hel = np.empty(delays.size)
    per = np.empty(delays.size)
    inten = np.empty(delays.size)
    maps = np.empty((delays.size,) + config.grid.shape) if keep_maps else None
    for i, dt in enumerate(delays):
        try:
            w = envelope_weight(dt, config.pulses.envelope_fwhm) if config.envelope_overlap else 1.0
            beta = superpose_fields(beta_1, beta_2, dt, omega, w)
            sb = build_sidebands(psi, beta, l_max)
            img = energy_filtered_map(sb, config.filter_orders)
            hel[i] = helicity_of_field(beta, config.helicity_annulus)
            try:
                per[i] = fringe_period(img, config.grid, cut)
            except InsufficientFringesError:
                per[i] = np.nan
            inten[i] = float(img.sum() * config.grid.pixel_area)
        except ChiralPinemError as err:
            err.delay = float(dt)
            err.args = (f"delay {dt * 1e15:.4f} fs: {err.args[0] if err.args else err}",)
            raise
        if keep_maps:
            maps[i] = img
    meta = {"l_max": int(l_max), "optical_period_s": light.optical_period,
            "helicity_definition": "(P+1 - P-1)/(P+1 + P-1) over the annulus",
            "helicity_annulus_m": list(config.helicity_annulus),
            "fringe_cut": {"angle": cut.angle, "r_min": cut.r_min, "r_max": cut.r_max},
            "envelope_overlap": config.envelope_overlap,
            "second_reference": config.second_reference}
    return DelayScan(delays, hel, per, inten, maps, meta)
