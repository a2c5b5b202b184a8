"""SNR, SSIM index maps, and MSSIM.

Two metric profiles are provided:

``literal``
    SNR with the denoised image centred on its own mean, SSIM from uniform 8x8
    windows anchored at their top-left pixel, MSSIM as the mean of squared SSIM.
``reported``
    SNR against the raw (uncentred) energy of the denoised image, SSIM from an
    11x11 Gaussian window (sigma 1.5) centred on each pixel, MSSIM as the plain
    mean.  This is the convention behind the published Lena numbers, so the
    sweep harness uses it by default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DimensionError, SingularityError
from .image_core import as_image, check_same_shape

DATA_RANGE = 255.0
BOX_WINDOW = 8
GAUSS_SIGMA = 1.5

PROFILES = {
    "literal": {"centered": True, "window": "box", "squared": True},
    "reported": {"centered": False, "window": "gaussian", "squared": False},
}
DEFAULT_PROFILE = "reported"


@dataclass
class MetricsReport:
    snr_db: float
    mssim: float
    ssim_map: np.ndarray

    def row(self) -> tuple[float, float]:
        return self.snr_db, self.mssim


def snr(u_n, clean, *, centered: bool = True) -> float:
    """Signal-to-noise ratio of ``u_n`` against ``clean`` in decibels.

    With ``centered`` the numerator is ``sum((u_n - mean(u_n))**2)``; otherwise
    it is ``sum(u_n**2)``.  Identical images raise :class:`SingularityError`.
    A constant ``u_n`` in centered mode gives ``-inf``.
    """
    u_n = np.asarray(u_n, dtype=np.float64)
    clean = np.asarray(clean, dtype=np.float64)
    check_same_shape(u_n, clean, names=("u_n", "clean"))
    err = np.sum((u_n - clean) ** 2)
    if err == 0.0:
        raise SingularityError("images are identical: SNR is infinite")
    if centered:
        num = np.sum((u_n - u_n.mean()) ** 2)
    else:
        num = np.sum(u_n * u_n)
    if num == 0.0:
        return -math.inf
    return float(10.0 * np.log10(num / err))


def _box_mean(x: np.ndarray, w: int) -> np.ndarray:
    # window anchored at its top-left pixel, replicate-padded on bottom/right
    h, wd = x.shape
    p = np.pad(x, ((0, w - 1), (0, w - 1)), mode="edge")
    cs = np.zeros((p.shape[0] + 1, p.shape[1] + 1))
    cs[1:, 1:] = p.cumsum(axis=0).cumsum(axis=1)
    s = cs[w:w + h, w:w + wd] - cs[:h, w:w + wd] - cs[w:w + h, :wd] + cs[:h, :wd]
    return s / (w * w)


def _gauss_mean(x: np.ndarray) -> np.ndarray:
    # truncate 3.5 sigma -> radius 5 -> 11x11 support at sigma 1.5
    return gaussian_filter(x, GAUSS_SIGMA, mode="nearest", truncate=3.5)


def ssim_map(u_n, clean, *, window: str = "box", data_range: float = DATA_RANGE) -> np.ndarray:
    """Per-pixel SSIM (luminance x contrast x structure), same size as the inputs.

    Uses ``c1 = (0.01 L)^2``, ``c2 = (0.03 L)^2``, ``c3 = c2 / 2``.  With that
    choice of ``c3`` the contrast and structure factors multiply out to
    ``(2 cov + c2) / (var_a + var_b + c2)``, which is what is evaluated; it keeps
    ``ssim_map(u, u) == 1`` exact and needs no square roots.
    """
    a = as_image(u_n, name="u_n")
    b = as_image(clean, name="clean")
    check_same_shape(a, b, names=("u_n", "clean"))
    if window == "box":
        if min(a.shape) < BOX_WINDOW:
            raise DimensionError(f"SSIM needs images of at least {BOX_WINDOW}x{BOX_WINDOW}")
        mean = lambda x: _box_mean(x, BOX_WINDOW)  # noqa: E731
    elif window == "gaussian":
        mean = _gauss_mean
    else:
        raise ValueError(f"unknown SSIM window {window!r}")
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    mu_a = mean(a)
    mu_b = mean(b)
    mu_ab = mu_a * mu_b
    var_a = mean(a * a) - mu_a * mu_a
    var_b = mean(b * b) - mu_b * mu_b
    cov = mean(a * b) - mu_ab
    lum = (2.0 * mu_ab + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    cs = (2.0 * cov + c2) / (var_a + var_b + c2)
    return lum * cs


def mssim(u_n, clean, *, squared: bool = True, window: str = "box") -> float:
    """Mean SSIM; ``squared`` averages SSIM**2 instead of SSIM."""
    m = ssim_map(u_n, clean, window=window)
    if squared:
        m = m * m
    return float(m.mean())


def ssim_diff(map_a, map_b) -> np.ndarray:
    """Pointwise ``map_a - map_b``; positive where the first method scores higher."""
    map_a = np.asarray(map_a, dtype=np.float64)
    map_b = np.asarray(map_b, dtype=np.float64)
    check_same_shape(map_a, map_b, names=("map_a", "map_b"))
    return map_a - map_b


def evaluate(u_n, clean, profile: str = DEFAULT_PROFILE) -> MetricsReport:
    """SNR, MSSIM and SSIM map under a named metric profile."""
    try:
        p = PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown metric profile {profile!r}; choose from {sorted(PROFILES)}") from None
    smap = ssim_map(u_n, clean, window=p["window"])
    vals = smap * smap if p["squared"] else smap
    return MetricsReport(snr(u_n, clean, centered=p["centered"]), float(vals.mean()), smap)
