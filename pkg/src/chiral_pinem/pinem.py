"""Inelastic sideband model: psi_l = psi_inc J_l(2|beta|) exp(i l arg(-beta)).

Only the transverse snapshot is modelled; the longitudinal factor
exp(i l w (z/v - t)) drops out of every intensity computed here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from . import kernels
from .errors import DomainError
from .nearfield import Grid2D, InteractionField
from .optics import ElectronBeam
from .sampling import LineCut

# tail of sum_{|l|>l_max} J_l(u)^2 stays below 1e-9 for u <= 2|beta|_max
LMAX_MARGIN = 15


@dataclass(frozen=True, eq=False)
class IncidentWavefunction:
    """Unit-norm transverse wavefunction on a grid (sum |psi|^2 dA = 1)."""

    grid: Grid2D
    values: np.ndarray
    width: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise DomainError("wavefunction shape does not match grid")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(self.intensity.sum() * self.grid.pixel_area)


def gaussian_wavefunction(grid: Grid2D, beam: ElectronBeam | None = None,
                          width: float | None = None,
                          center: tuple[float, float] = (0.0, 0.0)) -> IncidentWavefunction:
    """Gaussian envelope whose intensity falls to 1/e^2 at ``width``.

    ``width`` defaults to the beam's transverse coherence length.
    """
    if width is None:
        width = (beam or ElectronBeam()).transverse_coherence
    if not width > 0:
        raise DomainError("width must be positive")
    R, _ = grid.polar(center)
    psi = np.exp(-(R / width) ** 2).astype(np.complex128)
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.pixel_area)
    return IncidentWavefunction(grid, psi, width)


@dataclass(frozen=True, eq=False)
class SidebandSet:
    """Sideband fields for l = -l_max..l_max; ``fields[l + l_max]`` is psi_l."""

    grid: Grid2D
    l_max: int
    fields: np.ndarray
    psi_inc: IncidentWavefunction
    meta: dict = field(default_factory=dict)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.l_max, self.l_max + 1)

    def __getitem__(self, l: int) -> np.ndarray:
        if abs(l) > self.l_max:
            raise KeyError(l)
        return self.fields[l + self.l_max]

    def order_norms(self) -> np.ndarray:
        """sum |psi_l|^2 dA per order."""
        return np.sum(np.abs(self.fields) ** 2, axis=(1, 2)) * self.grid.pixel_area

    def total_norm(self) -> float:
        return float(self.order_norms().sum())


def lmax_rule(beta_max: float) -> int:
    return int(math.ceil(2.0 * beta_max)) + LMAX_MARGIN


def build_sidebands(psi_inc: IncidentWavefunction, beta: InteractionField,
                    l_max: int | None = None) -> SidebandSet:
    """Sideband wavefunctions for every order up to ``l_max``.

    ``l_max`` defaults to ``ceil(2 max|beta|) + 15``. Where beta vanishes the
    phase is never evaluated: J_0(0) = 1 keeps psi_0 = psi_inc and all other
    orders are zero.
    """
    psi_inc.grid.require_same(beta.grid)
    if l_max is None:
        l_max = lmax_rule(float(beta.modulus.max()))
    l_max = int(l_max)
    if l_max < 1:
        raise DomainError(f"l_max must be >= 1, got {l_max}")
    stack = kernels.sideband_stack(psi_inc.values.ravel(), beta.values.ravel(), l_max)
    fields = stack.reshape((2 * l_max + 1,) + beta.grid.shape)
    return SidebandSet(beta.grid, l_max, fields, psi_inc, {"backend": kernels.BACKEND})


def energy_filtered_map(sidebands: SidebandSet, orders=None) -> np.ndarray:
    """Real-space intensity of the inelastically scattered electrons.

    Sums |psi_l|^2 over ``orders`` (default: every l != 0 in the set), which
    mirrors imaging with the zero-loss peak removed.
    """
    if orders is None:
        orders = [l for l in sidebands.orders if l != 0]
    out = np.zeros(sidebands.grid.shape)
    for l in orders:
        f = sidebands[int(l)]
        out += f.real ** 2 + f.imag ** 2
    return out


def _one_minus_j0_squared(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    small = u < 0.5
    big = ~small
    jb = j0(u[big])
    out[big] = (1.0 - jb) * (1.0 + jb)
    # series for 1 - J0 avoids cancellation near the vortex cores
    q = (u[small] / 2.0) ** 2
    term = q.copy()
    one_minus = term.copy()
    for k in range(2, 12):
        term = -term * q / (k * k)
        one_minus += term
    out[small] = one_minus * (2.0 - one_minus)
    return out


def inelastic_closed_form(psi_inc: IncidentWavefunction, beta: InteractionField) -> np.ndarray:
    """|psi_inc|^2 (1 - J_0(2|beta|)^2), the all-orders inelastic intensity."""
    psi_inc.grid.require_same(beta.grid)
    return psi_inc.intensity * _one_minus_j0_squared(2.0 * beta.modulus)


@dataclass(frozen=True, eq=False)
class SpaceEnergyMap:
    """Intensity ``values[i, j]`` at cut position ``s[i]`` and order ``orders[j]``."""

    s: np.ndarray
    orders: np.ndarray
    values: np.ndarray

    def column(self, l: int) -> np.ndarray:
        return self.values[:, int(np.flatnonzero(self.orders == l)[0])]


def space_energy_map(sidebands: SidebandSet, cut: LineCut = LineCut()) -> SpaceEnergyMap:
    """|psi_l|^2 along a line through the hole for every order in the set."""
    cols = []
    s = None
    for l in sidebands.orders:
        f = sidebands[int(l)]
        s, col = cut.sample(sidebands.grid, f.real ** 2 + f.imag ** 2)
        cols.append(col)
    return SpaceEnergyMap(s, sidebands.orders.copy(), np.stack(cols, axis=1))


def central_dark_width(s: np.ndarray, column: np.ndarray, fraction: float = 0.5) -> float:
    """Distance from s = 0 to the first sample exceeding ``fraction`` of the max.

    Searched on both sides of the centre; the smaller distance is returned.
    """
    peak = column.max()
    if peak <= 0:
        return float("inf")
    c = int(np.argmin(np.abs(s)))
    thr = fraction * peak
    right = np.flatnonzero(column[c:] > thr)
    left = np.flatnonzero(column[:c + 1][::-1] > thr)
    d = [abs(s[c + right[0]]) if right.size else np.inf,
         abs(s[c - left[0]]) if left.size else np.inf]
    return float(min(d))
