"""Scenario configuration: TOML (or a run manifest) to resolved model objects.

Every physical key carries its unit as a suffix. Unknown keys and invalid
values raise :class:`ConfigError` naming the dotted key path.
"""
from __future__ import annotations

import copy
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import DelayScanConfig
from .errors import ConfigError, DomainError
from .farfield import DetectorModel
from .nearfield import PRESETS, Grid2D, HoleGeometry, PulsePair, reference_amplitude_from_geometry
from .optics import ElectronBeam, IncidentLight, MaterialStack, PolarizationState
from .proton import METHODS, PROFILES, ProtonModel
from .sampling import RadialCut

POLARIZATION_DEFAULT = {"kind": "circular", "sigma": 1, "angle_deg": 0.0, "chi_deg": 0.0,
                        "major_axis_deg": 0.0}

DEFAULTS = {
    "optics": {
        "photon_energy_ev": 1.57,
        "field_amplitude_v_per_m": 8e7,
        "incidence_angle_delta_deg": 4.5,
        "sample_tilt_alpha_deg": 4.5,
        "eps_metal_re": -29.0,
        "eps_metal_im": 0.3,
        "eps_dielectric": 4.0,
        "spp_decay_length_um": 10.0,  # 0 keeps the intrinsic loss
        "polarization": dict(POLARIZATION_DEFAULT),
    },
    "beam": {"kinetic_energy_ev": 200e3, "coherence_um": 0.85},
    "hole": {"radius_um": 0.4, "center_um": [0.0, 0.0]},
    "grid": {"nx": 256, "ny": 256, "half_width_x_um": 3.0, "half_width_y_um": 3.0},
    "scene": {"preset": "holography", "b": 0.25, "b_over_a": 1.0, "a": None},
    "pinem": {"l_max": None, "filter_orders": None, "cut_angle_deg": 0.0},
    "detector": {"broadening_sigma_per_um": 0.35, "aperture_radius_um": 7.5,
                 "film_transmissivity": 0.013, "hole_only": False},
    "farfield": {"pad_factor": 2, "orders": None, "phase_plate_order": 0},
    "pulses": {"enabled": False, "delay_fs": 0.0, "rel_amplitude_2": 1.0, "envelope_fwhm_fs": 55.0,
               "envelope_overlap": False, "second_reference": True,
               "polarization_2": dict(POLARIZATION_DEFAULT)},
    "timescan": {"t_start_fs": 0.0, "t_end_fs": 8.0, "step_fs": 0.334,
                 "helicity_annulus_um": [0.1, 0.35], "fringe_r_min_um": None,
                 "fringe_r_max_um": None},
    "proton": {"l": 1, "rms_radius_fm": 0.84, "profile": "exponential", "method": "projected",
               "resolution": None, "waist_over_rms": [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0,
                                                      50.0, 100.0]},
}


def _merge(base: dict, user: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in user.items():
        dotted = f"{path}{key}"
        if key not in base:
            raise ConfigError(dotted, "unknown key")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(dotted, "expected a table")
            out[key] = _merge(base[key], val, dotted + ".")
        else:
            out[key] = val
    return out


def load_config(path) -> dict:
    """Read a TOML scenario or the ``config`` entry of a run manifest."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise ConfigError("<file>", f"cannot read {p}: {err}") from None
    if p.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError("<file>", f"invalid JSON: {err}") from None
        data = data.get("config", data)
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as err:
            raise ConfigError("<file>", f"invalid TOML: {err}") from None
    return resolve(data)


def resolve(user: dict) -> dict:
    return _merge(DEFAULTS, user)


def _num(cfg: dict, section: str, key: str, positive: bool = False, allow_zero: bool = False):
    val = cfg[section][key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{section}.{key}", f"expected a number, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(f"{section}.{key}", "must be finite")
    if positive and not (val > 0 or (allow_zero and val == 0)):
        raise ConfigError(f"{section}.{key}", "must be positive")
    return float(val)


def _polarization(tab: dict, key: str) -> PolarizationState:
    kind = tab.get("kind")
    extra = set(tab) - set(POLARIZATION_DEFAULT)
    if extra:
        raise ConfigError(f"{key}.{sorted(extra)[0]}", "unknown key")
    try:
        if kind == "circular":
            return PolarizationState.circular(int(tab["sigma"]))
        if kind == "linear":
            return PolarizationState.linear(math.radians(tab["angle_deg"]))
        if kind == "elliptical":
            return PolarizationState.elliptical(math.radians(tab["chi_deg"]),
                                                math.radians(tab["major_axis_deg"]))
    except (DomainError, TypeError, ValueError) as err:
        raise ConfigError(key, str(err)) from None
    raise ConfigError(f"{key}.kind", f"expected circular|linear|elliptical, got {kind!r}")


@dataclass(frozen=True)
class Scenario:
    """Resolved configuration plus the model objects built from it."""

    config: dict
    light: IncidentLight
    stack: MaterialStack
    beam: ElectronBeam
    geometry: HoleGeometry
    grid: Grid2D
    A: complex
    B: complex
    detector: DetectorModel

    @classmethod
    def from_config(cls, cfg: dict) -> "Scenario":
        o = "optics"
        try:
            pol = _polarization(cfg[o]["polarization"], "optics.polarization")
            light = IncidentLight(_num(cfg, o, "photon_energy_ev", True),
                                  _num(cfg, o, "field_amplitude_v_per_m"), pol,
                                  math.radians(_num(cfg, o, "incidence_angle_delta_deg")),
                                  math.radians(_num(cfg, o, "sample_tilt_alpha_deg")))
            decay = _num(cfg, o, "spp_decay_length_um", True, allow_zero=True)
            stack = MaterialStack(complex(_num(cfg, o, "eps_metal_re"), _num(cfg, o, "eps_metal_im")),
                                  _num(cfg, o, "eps_dielectric"), decay * 1e-6 if decay else None)
        except DomainError as err:
            raise ConfigError("optics", str(err)) from None
        try:
            beam = ElectronBeam(_num(cfg, "beam", "kinetic_energy_ev", True),
                                _num(cfg, "beam", "coherence_um", True) * 1e-6)
        except DomainError as err:
            raise ConfigError("beam", str(err)) from None
        center = cfg["hole"]["center_um"]
        if not (isinstance(center, list) and len(center) == 2):
            raise ConfigError("hole.center_um", "expected [x, y]")
        try:
            geom = HoleGeometry(_num(cfg, "hole", "radius_um", True) * 1e-6,
                                (float(center[0]) * 1e-6, float(center[1]) * 1e-6))
        except DomainError as err:
            raise ConfigError("hole", str(err)) from None
        g = cfg["grid"]
        for key in ("nx", "ny"):
            if not isinstance(g[key], int) or isinstance(g[key], bool):
                raise ConfigError(f"grid.{key}", "expected an integer")
        try:
            grid = Grid2D(g["nx"], g["ny"], _num(cfg, "grid", "half_width_x_um", True) * 1e-6,
                          _num(cfg, "grid", "half_width_y_um", True) * 1e-6)
        except DomainError as err:
            raise ConfigError("grid", str(err)) from None
        sc = cfg["scene"]
        if sc["preset"] not in PRESETS:
            raise ConfigError("scene.preset", f"unknown preset {sc['preset']!r}")
        B = complex(_num(cfg, "scene", "b"))
        if sc["a"] is not None:
            A = complex(_num(cfg, "scene", "a"))
        else:
            try:
                A = reference_amplitude_from_geometry(light, sc["preset"], B,
                                                      sc["b_over_a"])
            except DomainError as err:
                raise ConfigError("scene.b_over_a", str(err)) from None
        d = "detector"
        try:
            det = DetectorModel(_num(cfg, d, "broadening_sigma_per_um", True, True) * 1e6,
                                _num(cfg, d, "aperture_radius_um", True) * 1e-6,
                                _num(cfg, d, "film_transmissivity", True, True))
        except DomainError as err:
            raise ConfigError(d, str(err)) from None
        if cfg[d]["hole_only"]:
            det = det.hole_only()
        return cls(cfg, light, stack, beam, geom, grid, A, B, det)

    def orders(self, section: str, key: str):
        val = self.config[section][key]
        if val is None:
            return None
        if not isinstance(val, list) or not all(isinstance(v, int) for v in val):
            raise ConfigError(f"{section}.{key}", "expected a list of integers")
        return tuple(val)

    def l_max(self):
        val = self.config["pinem"]["l_max"]
        if val is not None and (not isinstance(val, int) or val < 1):
            raise ConfigError("pinem.l_max", "expected a positive integer")
        return val

    def pulse_pair(self) -> PulsePair:
        p = self.config["pulses"]
        pol_2 = _polarization(p["polarization_2"], "pulses.polarization_2")
        try:
            return PulsePair(self.light.polarization, pol_2,
                             _num(self.config, "pulses", "rel_amplitude_2", True, True),
                             0.0, _num(self.config, "pulses", "envelope_fwhm_fs", True) * 1e-15)
        except DomainError as err:
            raise ConfigError("pulses", str(err)) from None

    def delays(self) -> np.ndarray:
        t0 = _num(self.config, "timescan", "t_start_fs")
        t1 = _num(self.config, "timescan", "t_end_fs")
        step = _num(self.config, "timescan", "step_fs", True)
        if t1 < t0:
            raise ConfigError("timescan.t_end_fs", "must not precede t_start_fs")
        n = int(math.floor((t1 - t0) / step + 1e-9)) + 1
        return (t0 + step * np.arange(n)) * 1e-15

    def delay_scan_config(self) -> DelayScanConfig:
        t = self.config["timescan"]
        ann = t["helicity_annulus_um"]
        if not (isinstance(ann, list) and len(ann) == 2 and 0 <= ann[0] < ann[1]):
            raise ConfigError("timescan.helicity_annulus_um", "expected [r_min, r_max]")
        cut = None
        if t["fringe_r_min_um"] is not None or t["fringe_r_max_um"] is not None:
            lo = t["fringe_r_min_um"]
            hi = t["fringe_r_max_um"]
            cut = RadialCut(0.0, 1.1 * self.geometry.radius if lo is None else lo * 1e-6,
                            None if hi is None else hi * 1e-6, self.geometry.center)
        p = self.config["pulses"]
        return DelayScanConfig(self.pulse_pair(), self.geometry, self.grid, self.light,
                               self.stack, self.beam, self.A, self.B, self.l_max(),
                               (ann[0] * 1e-6, ann[1] * 1e-6), cut,
                               self.orders("pinem", "filter_orders"),
                               bool(p["envelope_overlap"]), bool(p["second_reference"]))

    def proton(self):
        p = self.config["proton"]
        if p["profile"] not in PROFILES:
            raise ConfigError("proton.profile", f"expected one of {PROFILES}")
        if p["method"] not in METHODS:
            raise ConfigError("proton.method", f"expected one of {METHODS}")
        if not isinstance(p["l"], int):
            raise ConfigError("proton.l", "expected an integer")
        ratios = p["waist_over_rms"]
        if not (isinstance(ratios, list) and ratios):
            raise ConfigError("proton.waist_over_rms", "expected a non-empty list")
        try:
            model = ProtonModel(rms_charge_radius=_num(self.config, "proton", "rms_radius_fm",
                                                       True) * 1e-15,
                                density_profile=p["profile"])
        except DomainError as err:
            raise ConfigError("proton", str(err)) from None
        return model, p["l"], np.asarray(ratios, dtype=float), p["method"], p["resolution"]
