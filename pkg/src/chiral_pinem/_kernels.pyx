# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py``.

Same signatures and conventions; the per-point Miller recurrence uses its own
starting order instead of one shared by the whole array.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, ceil, fabs, floor, cos, sin, hypot, M_PI

cnp.import_array()

cdef double RESCALE_ABOVE = 1e250
cdef double RESCALE_BY = 1e-250
cdef double SERIES_BELOW = 1e-5


cdef inline int _start_order(int lmax, double x) noexcept nogil:
    cdef int top = <int>ceil(x)
    if lmax > top:
        top = lmax
    return 2 * ((top + 16 + <int>sqrt(40.0 * (top + 1))) // 2)


cdef void _ladder(double x, int lmax, double* buf) noexcept nogil:
    """Fill buf[0..lmax] with J_0(x)..J_lmax(x)."""
    cdef int k, kk, i
    cdef int top
    cdef double jp1, j, jm1, norm, inv2x
    cdef double h, q, t
    if x == 0.0:
        buf[0] = 1.0
        for i in range(1, lmax + 1):
            buf[i] = 0.0
        return
    if x < SERIES_BELOW:
        h = 0.5 * x
        q = h * h
        t = 1.0
        for i in range(lmax + 1):
            if i > 0:
                t *= h / i
            buf[i] = t * (1.0 - q / (i + 1) + q * q / (2.0 * (i + 1) * (i + 2)))
        return
    for i in range(lmax + 1):
        buf[i] = 0.0
    top = _start_order(lmax, x)
    inv2x = 2.0 / x
    jp1 = 0.0
    j = 1e-300
    norm = 0.0
    for k in range(top, 0, -1):
        jm1 = k * inv2x * j - jp1
        jp1 = j
        j = jm1
        kk = k - 1
        if kk <= lmax:
            buf[kk] = j
        if kk > 0 and kk % 2 == 0:
            norm += 2.0 * j
        if fabs(j) > RESCALE_ABOVE:
            j *= RESCALE_BY
            jp1 *= RESCALE_BY
            norm *= RESCALE_BY
            for i in range(kk, lmax + 1):
                buf[i] *= RESCALE_BY
    norm += j
    for i in range(lmax + 1):
        buf[i] /= norm


def bessel_j_ladder(u, int lmax):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef Py_ssize_t n = uu.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((lmax + 1, n))
    cdef double[::1] buf = np.empty(lmax + 1)
    cdef Py_ssize_t p
    cdef int l
    for p in range(n):
        _ladder(uu[p], lmax, &buf[0])
        for l in range(lmax + 1):
            out[l, p] = buf[l]
    return out


def sideband_stack(psi, beta, int lmax):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ps = np.ascontiguousarray(psi, dtype=np.complex128).ravel()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] bt = np.ascontiguousarray(beta, dtype=np.complex128).ravel()
    cdef Py_ssize_t n = ps.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((2 * lmax + 1, n), dtype=np.complex128)
    cdef double[::1] buf = np.empty(lmax + 1)
    cdef Py_ssize_t p
    cdef int l
    cdef double br, bi, mod, ur, ui, pr, pi_, nr, ni, tr, ti, jl, sign
    for p in range(n):
        br = bt[p].real
        bi = bt[p].imag
        mod = hypot(br, bi)
        _ladder(2.0 * mod, lmax, &buf[0])
        if mod > 0.0:
            ur = -br / mod
            ui = -bi / mod
        else:
            ur = 1.0
            ui = 0.0
        pr = ps[p].real
        pi_ = ps[p].imag
        nr = pr
        ni = pi_
        out[lmax, p] = (pr * buf[0]) + 1j * (pi_ * buf[0])
        for l in range(1, lmax + 1):
            # positive orders: multiply by unit; negative: by conj(unit)
            tr = pr * ur - pi_ * ui
            ti = pr * ui + pi_ * ur
            pr = tr
            pi_ = ti
            tr = nr * ur + ni * ui
            ti = ni * ur - nr * ui
            nr = tr
            ni = ti
            jl = buf[l]
            sign = -1.0 if l % 2 else 1.0
            out[lmax + l, p] = (pr * jl) + 1j * (pi_ * jl)
            out[lmax - l, p] = (nr * sign * jl) + 1j * (ni * sign * jl)
    return out


def ring_sample(field, double cx, double cy, radii, int nphi):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] f = np.ascontiguousarray(field, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(radii, dtype=np.float64).ravel()
    cdef Py_ssize_t ny = f.shape[0]
    cdef Py_ssize_t nx = f.shape[1]
    cdef Py_ssize_t nr = rr.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((nr, nphi), dtype=np.complex128)
    cdef double[::1] ca = np.cos(2.0 * np.pi * np.arange(nphi) / nphi)
    cdef double[::1] sa = np.sin(2.0 * np.pi * np.arange(nphi) / nphi)
    cdef Py_ssize_t i, j, ix, iy
    cdef double px, py, fx, fy
    cdef double complex f00, f01, f10, f11
    for i in range(nr):
        for j in range(nphi):
            px = cx + rr[i] * ca[j]
            py = cy + rr[i] * sa[j]
            if px < 0 or py < 0 or px > nx - 1 or py > ny - 1:
                raise IndexError("ring leaves the grid")
            ix = <Py_ssize_t>floor(px)
            iy = <Py_ssize_t>floor(py)
            if ix > nx - 2:
                ix = nx - 2
            if iy > ny - 2:
                iy = ny - 2
            fx = px - ix
            fy = py - iy
            f00 = f[iy, ix]
            f01 = f[iy, ix + 1]
            f10 = f[iy + 1, ix]
            f11 = f[iy + 1, ix + 1]
            out[i, j] = ((1 - fy) * ((1 - fx) * f00 + fx * f01)
                         + fy * ((1 - fx) * f10 + fx * f11))
    return out
