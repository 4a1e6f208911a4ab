"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
reference the extension is benchmarked and tested against.
"""
import numpy as np

_RESCALE_ABOVE = 1e250
_RESCALE_BY = 1e-250
# below this the recurrence ratio 2k/x can overflow in one step
_SERIES_BELOW = 1e-5


def start_order(lmax, x):
    """Even starting order for the downward Miller recurrence."""
    top = max(int(lmax), int(np.ceil(x)))
    return 2 * ((top + 16 + int(np.sqrt(40.0 * (top + 1)))) // 2)


def bessel_j_ladder(u, lmax):
    """J_0..J_lmax at every point of ``u`` (u >= 0) by Miller's algorithm.

    Returns an array of shape ``(lmax + 1, u.size)``. Normalisation uses
    J_0 + 2 * sum J_2k = 1.
    """
    u = np.ascontiguousarray(u, dtype=np.float64).ravel()
    lmax = int(lmax)
    out = np.zeros((lmax + 1, u.size))
    if u.size == 0:
        return out
    zero = u == 0.0
    out[0, zero] = 1.0
    tiny = ~zero & (u < _SERIES_BELOW)
    if tiny.any():
        h = 0.5 * u[tiny]
        q = h * h
        t = np.ones_like(h)
        for n in range(lmax + 1):
            if n:
                t = t * h / n
            out[n, tiny] = t * (1.0 - q / (n + 1) + q * q / (2.0 * (n + 1) * (n + 2)))
    live = u >= _SERIES_BELOW
    if not live.any():
        return out
    x = u[live]
    top = start_order(lmax, float(x.max()))
    inv2x = 2.0 / x
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    sub = np.zeros((lmax + 1, x.size))
    for k in range(top, 0, -1):
        # j holds J_k (unnormalised); step down to J_{k-1}
        jm1 = k * inv2x * j - jp1
        jp1, j = j, jm1
        kk = k - 1
        if kk <= lmax:
            sub[kk] = j
        if kk > 0 and kk % 2 == 0:
            norm += 2.0 * j
        big = np.abs(j) > _RESCALE_ABOVE
        if big.any():
            j[big] *= _RESCALE_BY
            jp1[big] *= _RESCALE_BY
            norm[big] *= _RESCALE_BY
            sub[:, big] *= _RESCALE_BY
    norm += j
    out[:, live] = sub / norm
    return out


def sideband_stack(psi, beta, lmax):
    """psi * J_l(2|beta|) * exp(i l arg(-beta)) for l = -lmax..lmax.

    Pixels with beta == 0 get J_0 = 1 and zero for every other order.
    Output shape ``(2 * lmax + 1, n)``, order l stored at row ``l + lmax``.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128).ravel()
    beta = np.ascontiguousarray(beta, dtype=np.complex128).ravel()
    lmax = int(lmax)
    mod = np.abs(beta)
    ladder = bessel_j_ladder(2.0 * mod, lmax)
    safe = np.where(mod > 0.0, mod, 1.0)
    unit = np.where(mod > 0.0, -beta / safe, 1.0 + 0.0j)
    out = np.empty((2 * lmax + 1, psi.size), dtype=np.complex128)
    out[lmax] = psi * ladder[0]
    pos = psi.copy()
    neg = psi.copy()
    conj_unit = np.conj(unit)
    for l in range(1, lmax + 1):
        pos = pos * unit
        neg = neg * conj_unit
        sign = -1.0 if l % 2 else 1.0
        out[lmax + l] = pos * ladder[l]
        out[lmax - l] = neg * (sign * ladder[l])
    return out


def ring_sample(field, cx, cy, radii, nphi):
    """Bilinear samples of ``field`` on circles about pixel position (cx, cy).

    ``field`` is indexed ``[iy, ix]``; ``radii`` are in pixel units. Returns
    complex array ``(len(radii), nphi)`` with angle ``2 pi j / nphi``.
    """
    field = np.ascontiguousarray(field, dtype=np.complex128)
    radii = np.asarray(radii, dtype=np.float64).ravel()
    ny, nx = field.shape
    ang = 2.0 * np.pi * np.arange(nphi) / nphi
    px = cx + radii[:, None] * np.cos(ang)[None, :]
    py = cy + radii[:, None] * np.sin(ang)[None, :]
    if (px.min() < 0 or py.min() < 0 or px.max() > nx - 1 or py.max() > ny - 1):
        raise IndexError("ring leaves the grid")
    ix = np.minimum(np.floor(px).astype(np.intp), nx - 2)
    iy = np.minimum(np.floor(py).astype(np.intp), ny - 2)
    fx = px - ix
    fy = py - iy
    f00 = field[iy, ix]
    f01 = field[iy, ix + 1]
    f10 = field[iy + 1, ix]
    f11 = field[iy + 1, ix + 1]
    return ((1 - fy) * ((1 - fx) * f00 + fx * f01)
            + fy * ((1 - fx) * f10 + fx * f11))
