"""Numba kernels for the per-pixel hot loops.

Each kernel mirrors the operation order of the numpy reference path in
``image_core`` / ``solver`` so that both backends produce bit-identical output.
Do not enable ``fastmath`` here: it licenses reassociation and FMA contraction,
which breaks that guarantee.
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import njit


@njit(cache=True)
def median3x3_nb(u):
    h, w = u.shape
    out = np.empty_like(u)
    buf = np.empty(9, dtype=np.float64)
    for i in range(h):
        i0 = max(i - 1, 0)
        i2 = min(i + 1, h - 1)
        for j in range(w):
            j0 = max(j - 1, 0)
            j2 = min(j + 1, w - 1)
            buf[0] = u[i0, j0]
            buf[1] = u[i0, j]
            buf[2] = u[i0, j2]
            buf[3] = u[i, j0]
            buf[4] = u[i, j]
            buf[5] = u[i, j2]
            buf[6] = u[i2, j0]
            buf[7] = u[i2, j]
            buf[8] = u[i2, j2]
            # insertion sort; 9 elements
            for a in range(1, 9):
                v = buf[a]
                b = a - 1
                while b >= 0 and buf[b] > v:
                    buf[b + 1] = buf[b]
                    b -= 1
                buf[b + 1] = v
            out[i, j] = buf[4]
    return out


@njit(cache=True)
def pde_step_nb(u, u0, g, eps, scale, lam, dt):
    """One explicit Euler step of the (modulated) TV flow.

    ``g`` and ``eps`` are per-pixel fields; pixels with ``g == 0`` are frozen.
    """
    h, w = u.shape
    out = np.empty_like(u)
    for i in range(h):
        im = max(i - 1, 0)
        ip = min(i + 1, h - 1)
        for j in range(w):
            gij = g[i, j]
            c = u[i, j]
            if gij == 0.0:
                out[i, j] = c
                continue
            jm = max(j - 1, 0)
            jp = min(j + 1, w - 1)
            right = u[i, jp]
            left = u[i, jm]
            down = u[ip, j]
            up = u[im, j]
            ux = (right - left) / 2.0
            uy = (down - up) / 2.0
            uxx = right - 2.0 * c + left
            uyy = down - 2.0 * c + up
            ux_dn = (u[ip, jp] - u[ip, jm]) / 2.0
            ux_up = (u[im, jp] - u[im, jm]) / 2.0
            uxy = (ux_dn - ux_up) / 2.0
            e = eps[i, j]
            e2 = e * e
            gx2 = ux * ux
            gy2 = uy * uy
            den = gx2 + gy2 + e2
            num = (gy2 + e2) * uxx - 2.0 * ux * uy * uxy + (gx2 + e2) * uyy
            uxi = num / den
            mag = math.sqrt(den)
            rhs = gij * (scale * (uxi / mag)) + (lam * gij) * (u0[i, j] - c)
            out[i, j] = c + dt * rhs
    return out
