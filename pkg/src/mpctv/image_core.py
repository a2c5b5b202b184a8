"""Image buffers, finite-difference derivatives, and the 3x3 median.

Images are plain 2-D ``float64`` numpy arrays.  All stencils use replicate
(Neumann) boundary extension.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _backend, _kernels
from .errors import DimensionError, SingularityError


class DerivativeSet(NamedTuple):
    """First and second central differences of one image."""

    ux: np.ndarray
    uy: np.ndarray
    uxx: np.ndarray
    uyy: np.ndarray
    uxy: np.ndarray


def as_image(u, *, name: str = "image") -> np.ndarray:
    """Validate ``u`` as an image and return it as a C-contiguous float64 array.

    Raises ``ValueError`` for anything that is not a non-empty, finite 2-D grid.
    """
    a = np.ascontiguousarray(u, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf samples")
    return a


def check_same_shape(*arrays, names=None):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) > 1:
        label = ", ".join(names) if names else "inputs"
        raise DimensionError(f"shape mismatch between {label}: {[np.shape(a) for a in arrays]}")


def derivatives(u) -> DerivativeSet:
    """Central first/second differences with replicate boundaries.

    ``x`` runs along columns (axis 1) and ``y`` along rows (axis 0).  The mixed
    derivative is the central difference of ``ux`` along ``y``, with ``ux``
    itself replicate-extended.
    """
    u = np.asarray(u, dtype=np.float64)
    p = np.pad(u, 1, mode="edge")
    right, left = p[1:-1, 2:], p[1:-1, :-2]
    down, up = p[2:, 1:-1], p[:-2, 1:-1]
    ux = (right - left) / 2.0
    uy = (down - up) / 2.0
    uxx = right - 2.0 * u + left
    uyy = down - 2.0 * u + up
    q = np.pad(ux, ((1, 1), (0, 0)), mode="edge")
    uxy = (q[2:] - q[:-2]) / 2.0
    return DerivativeSet(ux, uy, uxx, uyy, uxy)


def gradient_magnitude(ux, uy, eps) -> np.ndarray:
    """Regularized gradient norm ``sqrt(ux^2 + uy^2 + eps^2)``.

    ``eps`` may be a scalar or a per-pixel field of the same shape.
    """
    ux = np.asarray(ux, dtype=np.float64)
    uy = np.asarray(uy, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    check_same_shape(ux, uy, names=("ux", "uy"))
    if eps.ndim:
        check_same_shape(ux, eps, names=("ux", "eps"))
    if np.any(eps < 0):
        raise ValueError("eps must be >= 0")
    return np.sqrt(ux * ux + uy * uy + eps * eps)


def _edge_second_derivative(d: DerivativeSet, eps):
    # unguarded; callers mask pixels where the denominator is zero
    e2 = eps * eps
    gx2 = d.ux * d.ux
    gy2 = d.uy * d.uy
    den = gx2 + gy2 + e2
    num = (gy2 + e2) * d.uxx - 2.0 * d.ux * d.uy * d.uxy + (gx2 + e2) * d.uyy
    return num / den, den


def edge_second_derivative(d: DerivativeSet, eps) -> np.ndarray:
    """Second derivative along the level-line direction, regularized by ``eps``.

    Computes ``((uy^2+e^2) uxx - 2 ux uy uxy + (ux^2+e^2) uyy) / (ux^2+uy^2+e^2)``.
    Raises :class:`SingularityError` if the denominator vanishes anywhere, which
    can only happen where ``eps`` is zero on a flat pixel.
    """
    eps = np.asarray(eps, dtype=np.float64)
    if np.any(eps < 0):
        raise ValueError("eps must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        out, den = _edge_second_derivative(d, eps)
    if np.any(den == 0.0):
        raise SingularityError("zero gradient with eps = 0: edge direction undefined")
    return out


def median3x3(u) -> np.ndarray:
    """3x3 median filter with replicate boundaries (exact 5th order statistic)."""
    u = as_image(u)
    if _backend.numba_enabled():
        return _kernels.median3x3_nb(u)
    p = np.pad(u, 1, mode="edge")
    h, w = u.shape
    stack = np.stack([p[i:i + h, j:j + w] for i in range(3) for j in range(3)])
    return np.partition(stack, 4, axis=0)[4]
