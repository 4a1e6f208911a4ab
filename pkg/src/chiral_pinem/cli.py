"""Command-line scenario runner.

    chiral-pinem <nearfield|farfield|timescan|proton> --config FILE [--out DIR]

Every run writes ``run_manifest.json`` next to its outputs. Exit status is 0
on success, 2 for configuration or domain errors, 3 for convergence errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io, kernels
from .analysis import run_delay_scan, sign_changes_per_cycle
from .config import Scenario, load_config
from .errors import ChiralPinemError, ConfigError, ConvergenceError, DomainError, ShapeError
from .farfield import far_field, line_profile, peak_radius, spiral_phase_plate_reference
from .nearfield import InteractionField, superpose_two_pulses, synthesize_beta
from .optics import derive_spp_wavevector, spp_wavelength
from .pinem import (build_sidebands, energy_filtered_map, gaussian_wavefunction,
                    space_energy_map)
from .proton import moment_vs_waist_sweep
from .sampling import LineCut

log = logging.getLogger("chiral_pinem")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3


class Outputs:
    """Collects written files so the manifest can checksum them."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name

    def map(self, stem: str, values: np.ndarray, header: dict) -> None:
        io.write_map_csv(self.path(f"{stem}.csv"), values, header)
        io.write_png16(self.path(f"{stem}.png"), values, {"quantity": stem})
        self.files.append(f"{stem}.png.json")

    def json(self, name: str, data: dict) -> None:
        self.path(name).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _grid_header(sc: Scenario, grid=None) -> dict:
    g = grid or sc.grid
    return {"nx": g.nx, "ny": g.ny, "half_width_x_m": g.extent_x, "half_width_y_m": g.extent_y,
            "pixel_m": [g.dx, g.dy], "origin_index": list(g.center_index), "layout": "row = y"}


def _beta(sc: Scenario, beta_file: str | None) -> InteractionField:
    if beta_file:
        return io.read_beta(beta_file)
    beta = synthesize_beta(sc.geometry, sc.grid, sc.light, sc.stack, sc.A, sc.B)
    p = sc.config["pulses"]
    if p["enabled"]:
        pair = sc.pulse_pair().at(float(p["delay_fs"]) * 1e-15)
        beta = superpose_two_pulses(beta, pair, sc.light, bool(p["envelope_overlap"]),
                                    bool(p["second_reference"]))
    return beta


def _sidebands(sc: Scenario, beta: InteractionField):
    psi = gaussian_wavefunction(beta.grid, sc.beam, center=sc.geometry.center)
    return build_sidebands(psi, beta, sc.l_max())


def cmd_nearfield(sc: Scenario, out: Outputs, args, derived: dict) -> None:
    beta = _beta(sc, args.beta_file)
    hdr = _grid_header(sc, beta.grid)
    io.write_beta(out.path("beta.bin"), beta)
    out.map("beta_modulus", beta.modulus, dict(hdr, quantity="|beta|"))
    out.map("beta_phase", beta.phase, dict(hdr, quantity="arg beta (rad)"))
    sb = _sidebands(sc, beta)
    derived["l_max"] = sb.l_max
    orders = sc.orders("pinem", "filter_orders")
    img = energy_filtered_map(sb, orders)
    out.map("energy_filtered", img, dict(hdr, quantity="inelastic intensity (1/m^2)",
                                         orders="all l != 0" if orders is None else list(orders)))
    cut = LineCut(np.radians(sc.config["pinem"]["cut_angle_deg"]), center=sc.geometry.center)
    sem = space_energy_map(sb, cut)
    io.write_map_csv(out.path("space_energy.csv"), sem.values,
                     {"rows": "position along cut (m)", "columns": "order l",
                      "s_m": [float(x) for x in sem.s], "orders": [int(l) for l in sem.orders],
                      "cut_angle_deg": sc.config["pinem"]["cut_angle_deg"]})
    io.write_png16(out.path("space_energy.png"), sem.values.T[::-1], {"quantity": "space_energy"})
    out.files.append("space_energy.png.json")
    if args.keep_sidebands:
        np.save(out.path("sidebands.npy"), sb.fields)


def cmd_farfield(sc: Scenario, out: Outputs, args, derived: dict) -> None:
    beta = _beta(sc, args.beta_file)
    sb = _sidebands(sc, beta)
    derived["l_max"] = sb.l_max
    pad = sc.config["farfield"]["pad_factor"]
    if not isinstance(pad, int) or pad < 2:
        raise ConfigError("farfield.pad_factor", "expected an integer >= 2")
    ff = far_field(sb, sc.detector, sc.geometry, pad, sc.orders("farfield", "orders"),
                   keep_fields=args.keep_sidebands)
    hdr = {"kx_per_m": [float(ff.kx[0]), ff.dkx], "ky_per_m": [float(ff.ky[0]), ff.dky],
           "shape": list(ff.intensity.shape), "convention": "k = 2 pi / distance",
           "broadening_sigma_per_m": sc.detector.momentum_broadening_sigma}
    out.map("farfield", ff.intensity, dict(hdr, quantity="I_F broadened"))
    out.map("farfield_raw", ff.raw, dict(hdr, quantity="I_F unbroadened"))
    summary = {"peak_radius_per_m": peak_radius(ff),
               "center_over_max": ff.at_origin() / float(ff.intensity.max()),
               "raw_center_over_max": ff.at_origin(raw=True) / float(ff.raw.max())}
    if args.profiles:
        io.write_table_csv(out.path("profiles.csv"),
                           {"k_per_m": ff.kx, "I_horizontal": line_profile(ff, "horizontal"),
                            "I_vertical": line_profile(ff, "vertical")})
    order = sc.config["farfield"]["phase_plate_order"]
    if order:
        ref = spiral_phase_plate_reference(int(order), sc.geometry, sb.psi_inc, sc.detector, pad)
        out.map("phase_plate", ref.intensity, dict(hdr, quantity=f"spiral phase plate l={order}"))
        summary["phase_plate_peak_radius_per_m"] = peak_radius(ref)
    if args.keep_sidebands:
        np.save(out.path("farfield_fields.npy"), np.stack([ff.fields[l] for l in ff.orders]))
    out.json("farfield_summary.json", summary)


def cmd_timescan(sc: Scenario, out: Outputs, args, derived: dict) -> None:
    if args.beta_file:
        raise ConfigError("--beta-file", "delay scans synthesize both pulses; no file input")
    cfg = sc.delay_scan_config()
    delays = sc.delays()
    scan = run_delay_scan(cfg, delays, keep_maps=True)
    derived["l_max"] = scan.meta["l_max"]
    io.write_table_csv(out.path("delayscan.csv"),
                       {"delay_fs": delays * 1e15, "helicity": scan.helicity,
                        "fringe_period_um": scan.fringe_period * 1e6,
                        "intensity": scan.intensity})
    summary = dict(scan.meta)
    try:
        fit = scan.fit_intensity()
        summary["intensity_fit"] = {"period_fs": fit.period * 1e15, "amplitude": fit.amplitude,
                                    "offset": fit.offset, "rms_residual": fit.rms_residual,
                                    "harmonics": fit.harmonics}
        if np.isfinite(fit.period):
            summary["helicity_sign_changes_per_cycle"] = sign_changes_per_cycle(
                delays, scan.helicity, fit.period)
    except (RuntimeError, ChiralPinemError) as err:
        summary["intensity_fit"] = {"error": str(err)}
    out.json("delayscan.json", summary)
    diffs = scan.maps - scan.maps.mean(axis=0)
    np.save(out.path("difference_maps.npy"), diffs)
    for i, d in enumerate(diffs):
        io.write_png16(out.path(f"difference_{i:03d}.png"), d,
                       {"delay_fs": float(delays[i] * 1e15), "reference": "scan mean"})
        out.files.append(f"difference_{i:03d}.png.json")


def cmd_proton(sc: Scenario, out: Outputs, args, derived: dict) -> None:
    model, l, ratios, method, resolution = sc.proton()
    waists = ratios * model.rms_charge_radius
    sweep = moment_vs_waist_sweep(model, l, waists, method, resolution)
    io.write_table_csv(out.path("proton_sweep.csv"),
                       {"w_fm": sweep[:, 0] * 1e15, "mu_over_muN": sweep[:, 1]})
    tail = sweep[-1, 1]
    out.json("proton_sweep.json", {
        "profile": model.density_profile, "l": l, "method": method,
        "resolution": resolution, "rms_radius_fm": model.rms_charge_radius * 1e15,
        "asymptote": {"expected": float(l), "last_waist_over_rms": float(ratios[-1]),
                      "value": float(tail), "abs_deviation": float(abs(tail - l))}})


COMMANDS = {"nearfield": cmd_nearfield, "farfield": cmd_farfield,
            "timescan": cmd_timescan, "proton": cmd_proton}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chiral-pinem", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="scenario TOML or run_manifest.json")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--beta-file", default=None, help="binary beta grid replacing the model")
    ap.add_argument("--profiles", action="store_true", help="write far-field line profiles")
    ap.add_argument("--keep-sidebands", action="store_true", help="also save complex fields")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _derived(sc: Scenario) -> dict:
    d = {"backend": kernels.BACKEND, "optical_period_s": sc.light.optical_period,
         "A": [sc.A.real, sc.A.imag], "B": [sc.B.real, sc.B.imag]}
    try:
        k = derive_spp_wavevector(sc.light, sc.stack)
    except DomainError:
        return d
    d.update(k_spp_per_m=[k.real, k.imag], spp_wavelength_m=spp_wavelength(k))
    return d


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        sc = Scenario.from_config(cfg)
        out = Outputs(Path(args.out))
        derived = _derived(sc)
        COMMANDS[args.command](sc, out, args, derived)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ShapeError) as err:
        print(f"domain error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as err:
        print(f"convergence error: {err}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ChiralPinemError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILURE
    manifest = {
        "tool": "chiral-pinem", "version": __version__, "command": args.command,
        "config": cfg, "derived": derived,
        "inputs": {"beta_file": io.sha256(args.beta_file) if args.beta_file else None},
        "wall_clock_s": time.perf_counter() - t0,
        "outputs": {name: io.sha256(out.root / name) for name in sorted(set(out.files))},
    }
    (out.root / "run_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("wrote %d files to %s", len(manifest["outputs"]), out.root)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
