"""Bilinear sampling along straight cuts through a grid."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .nearfield import Grid2D


def bilinear(values: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Interpolate ``values[iy, ix]`` at fractional pixel positions."""
    ny, nx = values.shape
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    eps = 1e-9
    if px.min() < -eps or py.min() < -eps or px.max() > nx - 1 + eps or py.max() > ny - 1 + eps:
        raise DomainError("sample points leave the grid")
    px = np.clip(px, 0.0, nx - 1)
    py = np.clip(py, 0.0, ny - 1)
    ix = np.minimum(np.floor(px).astype(np.intp), nx - 2)
    iy = np.minimum(np.floor(py).astype(np.intp), ny - 2)
    fx = px - ix
    fy = py - iy
    return ((1 - fy) * ((1 - fx) * values[iy, ix] + fx * values[iy, ix + 1])
            + fy * ((1 - fx) * values[iy + 1, ix] + fx * values[iy + 1, ix + 1]))


@dataclass(frozen=True)
class LineCut:
    """Straight line through ``center`` at ``angle`` (rad); ``half_length`` in m.

    ``None`` half-length runs to the largest circle inscribed in the grid.
    """

    angle: float = 0.0
    half_length: float | None = None
    center: tuple[float, float] = (0.0, 0.0)

    def positions(self, grid: Grid2D) -> np.ndarray:
        ds = min(grid.dx, grid.dy)
        limit = grid.inscribed_radius(self.center)
        half = limit if self.half_length is None else self.half_length
        if not half > 0 or half > limit * (1 + 1e-12):
            raise DomainError(f"cut half-length {half} exceeds the grid (max {limit})")
        n = int(math.floor(half / ds + 1e-9))
        return np.arange(-n, n + 1) * ds

    def sample(self, grid: Grid2D, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = self.positions(grid)
        x = self.center[0] + s * math.cos(self.angle)
        y = self.center[1] + s * math.sin(self.angle)
        px, py = grid.to_pixel(x, y)
        return s, bilinear(values, px, py)


@dataclass(frozen=True)
class RadialCut:
    """Ray from ``center`` at ``angle`` between ``r_min`` and ``r_max`` (m)."""

    angle: float = 0.0
    r_min: float = 0.0
    r_max: float | None = None
    center: tuple[float, float] = (0.0, 0.0)

    def sample(self, grid: Grid2D, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ds = min(grid.dx, grid.dy)
        limit = grid.inscribed_radius(self.center)
        r_max = limit if self.r_max is None else self.r_max
        if r_max > limit * (1 + 1e-12) or not r_max > self.r_min >= 0:
            raise DomainError(f"radial cut [{self.r_min}, {r_max}] does not fit the grid")
        r = self.r_min + np.arange(int(math.floor((r_max - self.r_min) / ds + 1e-9)) + 1) * ds
        x = self.center[0] + r * math.cos(self.angle)
        y = self.center[1] + r * math.sin(self.angle)
        px, py = grid.to_pixel(x, y)
        return r, bilinear(values, px, py)
