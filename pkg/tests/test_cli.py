import json
import subprocess
import sys

import numpy as np
import pytest

from chiral_pinem import io
from chiral_pinem.cli import run

SMALL = """
[grid]
nx = 64
ny = 64
half_width_x_um = 2.0
half_width_y_um = 2.0
"""

CONFIGS = {
    "nearfield": SMALL,
    "farfield": SMALL + "[farfield]\nphase_plate_order = 1\n",
    "timescan": SMALL + """
[optics.polarization]
kind = "elliptical"
chi_deg = 20.0
[pulses.polarization_2]
kind = "elliptical"
chi_deg = 20.0
major_axis_deg = 90.0
[timescan]
t_end_fs = 1.0
""",
    "proton": "[proton]\nwaist_over_rms = [2.0, 10.0]\n",
}

CSV = {"nearfield": ["beta_modulus.csv", "beta_phase.csv", "energy_filtered.csv",
                     "space_energy.csv"],
       "farfield": ["farfield.csv", "farfield_raw.csv", "phase_plate.csv", "profiles.csv"],
       "timescan": ["delayscan.csv"],
       "proton": ["proton_sweep.csv"]}


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize("cmd", sorted(CONFIGS))
def test_subcommand_runs_and_manifest_reproduces(tmp_path, cmd):
    cfg = write(tmp_path, CONFIGS[cmd])
    a, b = tmp_path / "a", tmp_path / "b"
    assert run([cmd, "--config", cfg, "--out", str(a), "--profiles"]) == 0
    manifest = json.loads((a / "run_manifest.json").read_text())
    assert manifest["command"] == cmd
    for name in CSV[cmd]:
        assert manifest["outputs"][name] == io.sha256(a / name)
    assert run([cmd, "--config", str(a / "run_manifest.json"), "--out", str(b),
                "--profiles"]) == 0
    for name in CSV[cmd]:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_nearfield_beta_file_roundtrip(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert run(["nearfield", "--config", cfg, "--out", str(tmp_path / "a"),
                "--keep-sidebands"]) == 0
    beta = tmp_path / "a" / "beta.bin"
    assert run(["nearfield", "--config", cfg, "--out", str(tmp_path / "b"),
                "--beta-file", str(beta)]) == 0
    for name in ("beta_modulus.csv", "energy_filtered.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    m = json.loads((tmp_path / "b" / "run_manifest.json").read_text())
    assert m["inputs"]["beta_file"] == io.sha256(beta)
    sb = np.load(tmp_path / "a" / "sidebands.npy")
    assert sb.shape[1:] == (64, 64)


def test_farfield_profiles_columns(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert run(["farfield", "--config", cfg, "--out", str(tmp_path), "--profiles"]) == 0
    t = io.read_table_csv(tmp_path / "profiles.csv")
    assert list(t) == ["k_per_m", "I_horizontal", "I_vertical"]
    assert t["k_per_m"].size == 128


@pytest.mark.parametrize("text", ["[grid]\nnx = 63\n", "[optics]\ncolour = 1\n",
                                  "[grid\n", "[proton]\nprofile = \"hollow\"\n"])
def test_config_errors_exit_2(tmp_path, text, capsys):
    cfg = write(tmp_path, text)
    assert run(["proton", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert run(["nearfield", "--config", str(tmp_path / "none.toml")]) == 2


def test_unresolved_proton_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, "[proton]\nwaist_over_rms = [0.01]\n")
    assert run(["proton", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "convergence" in capsys.readouterr().err


def test_module_entry_point_version():
    out = subprocess.run([sys.executable, "-m", "chiral_pinem", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "0.1.0"
