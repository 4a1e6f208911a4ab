"""File formats: binary beta grids, map CSV, 16-bit PNG with sidecar JSON."""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DomainError
from .nearfield import Grid2D, InteractionField

BETA_MAGIC = b"BETA"
BETA_VERSION = 1
BETA_HEADER = struct.Struct("<4sIIIdd")
BETA_HEADER_SIZE = 64


def write_beta(path, field: InteractionField) -> None:
    """Write beta as a 64-byte header plus row-major (re, im) float64 pairs.

    ``extent_x``/``extent_y`` in the header are grid half-widths in metres.
    """
    g = field.grid
    head = BETA_HEADER.pack(BETA_MAGIC, BETA_VERSION, g.nx, g.ny, g.extent_x, g.extent_y)
    body = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(head.ljust(BETA_HEADER_SIZE, b"\0"))
        fh.write(body)


def read_beta(path) -> InteractionField:
    raw = Path(path).read_bytes()
    if len(raw) < BETA_HEADER_SIZE:
        raise DomainError(f"{path}: truncated header")
    magic, version, nx, ny, ex, ey = BETA_HEADER.unpack_from(raw)
    if magic != BETA_MAGIC:
        raise DomainError(f"{path}: bad magic {magic!r}")
    if version != BETA_VERSION:
        raise DomainError(f"{path}: unsupported version {version}")
    expected = BETA_HEADER_SIZE + 16 * nx * ny
    if len(raw) != expected:
        raise DomainError(f"{path}: size {len(raw)} does not match {nx}x{ny} grid ({expected})")
    grid = Grid2D(nx, ny, ex, ey)
    values = np.frombuffer(raw, dtype="<c16", offset=BETA_HEADER_SIZE).reshape(ny, nx)
    return InteractionField(grid, values, meta={"source": str(path)})


def _fmt(x: float) -> str:
    return repr(float(x))


def write_map_csv(path, values: np.ndarray, header: dict) -> None:
    """Row-major CSV, one grid row per line, with ``# key: value`` header lines."""
    values = np.asarray(values, dtype=np.float64)
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in header.items()]
    lines.append(f"# shape: {values.shape[0]} {values.shape[1]}")
    lines += [",".join(_fmt(x) for x in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_map_csv(path) -> tuple[np.ndarray, dict]:
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            header[key] = val if key == "shape" else json.loads(val)
        elif line:
            rows.append([float(x) for x in line.split(",")])
    return np.array(rows), header


def write_table_csv(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=np.float64) for n in names])
    lines = [",".join(names)] + [",".join(_fmt(x) for x in row) for row in data]
    Path(path).write_text("\n".join(lines) + "\n")


def read_table_csv(path) -> dict[str, np.ndarray]:
    text = Path(path).read_text().splitlines()
    names = text[0].split(",")
    data = np.array([[float(x) for x in l.split(",")] for l in text[1:] if l], ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


def write_png16(path, values: np.ndarray, meta: dict | None = None) -> dict:
    """Linear grayscale 16-bit PNG; min/max scaling goes to ``<path>.json``.

    Row 0 of the image is the largest y, so the picture is upright.
    """
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    scaled = np.zeros(v.shape) if span == 0 else (v - lo) / span
    pixels = np.rint(scaled[::-1] * 65535).astype(np.uint16)
    Image.fromarray(pixels).save(path, format="PNG")
    side = {"min": lo, "max": hi, "bit_depth": 16, "colormap": "linear grayscale",
            "origin": "upper row = max y"}
    side.update(meta or {})
    Path(str(path) + ".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    return side


def read_png16(path) -> np.ndarray:
    return np.asarray(Image.open(path))


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
