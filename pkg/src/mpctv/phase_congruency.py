"""Oriented phase congruency, its covariance moments, and the adjust factor.

Phase congruency is computed with a frequency-domain bank of log-Gabor filters
(radial log-Gaussian times a raised-cosine angular spread), with noise
compensation from the median amplitude at the smallest scale and a sigmoid
weighting for frequency spread.  The moment fields and the maximum moment
follow the covariance-of-orientations construction; the adjust factor
``g = (1 - M_norm)**m`` is what the MPC-TV solver uses to damp diffusion on
edges.

Inputs are expected on a unit intensity scale (roughly ``[0, 1]``); the small
stabilizing constant inside the filter-response ratios is absolute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .errors import ConfigError, ImageTooSmallError
from .image_core import as_image, check_same_shape

_EPS = 1e-4
MIN_PC_SIZE = 16
BOUNDARIES = ("symmetric", "periodic")


@dataclass(frozen=True)
class PCParams:
    orientation_count: int = 6
    scale_count: int = 4
    min_wavelength: float = 3.0
    scale_multiplier: float = 2.1
    sigma_on_f: float = 0.55
    noise_threshold_k: float = 2.0
    # frequency-spread weighting (sigmoid cut-off and gain)
    cut_off: float = 0.5
    spread_gain: float = 10.0
    # "symmetric": mirror-extend before filtering so the FFT sees no wrap-around
    # step at the image border; "periodic": filter the image as-is
    boundary: str = "symmetric"

    def __post_init__(self):
        problems = []
        if int(self.orientation_count) != self.orientation_count or self.orientation_count < 1:
            problems.append("orientation_count must be an integer >= 1")
        if int(self.scale_count) != self.scale_count or self.scale_count < 1:
            problems.append("scale_count must be an integer >= 1")
        if not self.min_wavelength >= 2:
            problems.append("min_wavelength must be >= 2")
        for name in ("scale_multiplier", "sigma_on_f", "noise_threshold_k", "spread_gain"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be > 0")
        if not 0 <= self.cut_off <= 1:
            problems.append("cut_off must be in [0, 1]")
        if self.boundary not in BOUNDARIES:
            problems.append(f"boundary must be one of {BOUNDARIES}")
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def angles(self) -> np.ndarray:
        return orientation_angles(self.orientation_count)


@dataclass
class PCResult:
    pc_maps: list[np.ndarray]
    angles: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    M: np.ndarray
    M_norm: np.ndarray = field(repr=False)

    @property
    def pc_sum(self) -> np.ndarray:
        return np.sum(self.pc_maps, axis=0)


def orientation_angles(n: int) -> np.ndarray:
    """Evenly spaced filter orientations ``k*pi/n`` for ``k = 0..n-1``."""
    return np.arange(n) * (np.pi / n)


def _freq_axis(n: int) -> np.ndarray:
    # normalized frequencies in [-0.5, 0.5), symmetric for odd n
    if n % 2:
        return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / max(n - 1, 1)
    return np.arange(-n // 2, n // 2) / n


@lru_cache(maxsize=8)
def _filter_bank(rows: int, cols: int, params: PCParams):
    """Radial log-Gabor filters (per scale) and angular spreads (per orientation).

    Both are laid out in unshifted FFT order.  Cached per shape and parameter
    set; the returned arrays are read-only.
    """
    fx, fy = np.meshgrid(_freq_axis(cols), _freq_axis(rows))
    fx = np.fft.ifftshift(fx)
    fy = np.fft.ifftshift(fy)
    radius = np.sqrt(fx * fx + fy * fy)
    radius[0, 0] = 1.0
    sin_t = fy / radius
    cos_t = fx / radius

    # Butterworth low-pass keeps the filters away from the corner frequencies
    lowpass = 1.0 / (1.0 + (radius / 0.45) ** 30)
    radial = np.empty((params.scale_count, rows, cols))
    two_log_sq = 2.0 * math.log(params.sigma_on_f) ** 2
    for s in range(params.scale_count):
        f0 = 1.0 / (params.min_wavelength * params.scale_multiplier ** s)
        lg = np.exp(-(np.log(radius / f0) ** 2) / two_log_sq) * lowpass
        lg[0, 0] = 0.0
        radial[s] = lg

    n = params.orientation_count
    spread = np.empty((n, rows, cols))
    for o, ang in enumerate(orientation_angles(n)):
        ds = sin_t * math.cos(ang) - cos_t * math.sin(ang)
        dc = cos_t * math.cos(ang) + sin_t * math.sin(ang)
        dtheta = np.minimum(np.abs(np.arctan2(ds, dc)) * n / 2.0, np.pi)
        spread[o] = (np.cos(dtheta) + 1.0) / 2.0

    radial.flags.writeable = False
    spread.flags.writeable = False
    return radial, spread


def min_image_size(params: PCParams) -> int:
    return max(MIN_PC_SIZE, int(math.ceil(2 * params.min_wavelength)))


def oriented_pc(u, params: PCParams | None = None) -> list[np.ndarray]:
    """Phase congruency map for each filter orientation, values in ``[0, 1]``."""
    params = params or PCParams()
    u = as_image(u)
    need = min_image_size(params)
    if min(u.shape) < need:
        raise ImageTooSmallError(
            f"phase congruency needs images of at least {need}x{need} pixels "
            f"(min_wavelength={params.min_wavelength}), got {u.shape[0]}x{u.shape[1]}"
        )
    rows, cols = u.shape
    if params.boundary == "symmetric":
        # half-sample mirror: the doubled image is smooth under periodic wrap
        work = np.pad(u, ((0, rows), (0, cols)), mode="symmetric")
    else:
        work = u
    radial, spread = _filter_bank(work.shape[0], work.shape[1], params)
    nscale = params.scale_count
    mult = params.scale_multiplier
    spectrum = sfft.fft2(work)

    # expected noise energy from a Rayleigh-distributed amplitude at the finest scale
    tau_factor = (1 - (1 / mult) ** nscale) / (1 - 1 / mult)
    noise_mean_k = math.sqrt(math.pi / 2)
    noise_sigma_k = math.sqrt((4 - math.pi) / 2)

    maps = []
    for o in range(params.orientation_count):
        responses = sfft.ifft2(spectrum[None] * (radial * spread[o]), axes=(-2, -1), workers=-1)
        responses = responses[:, :rows, :cols]
        even = responses.real
        odd = responses.imag
        amp = np.abs(responses)
        sum_even = even.sum(axis=0)
        sum_odd = odd.sum(axis=0)
        sum_amp = amp.sum(axis=0)
        max_amp = amp.max(axis=0)

        tau = np.median(amp[0]) / math.sqrt(math.log(4))
        total_tau = tau * tau_factor
        threshold = total_tau * noise_mean_k + params.noise_threshold_k * total_tau * noise_sigma_k

        x_energy = np.sqrt(sum_even ** 2 + sum_odd ** 2) + _EPS
        mean_e = sum_even / x_energy
        mean_o = sum_odd / x_energy
        energy = (even * mean_e + odd * mean_o - np.abs(even * mean_o - odd * mean_e)).sum(axis=0)
        energy = np.maximum(energy - threshold, 0.0)

        if nscale > 1:
            width = (sum_amp / (max_amp + _EPS) - 1.0) / (nscale - 1)
        else:
            width = np.zeros_like(sum_amp)
        weight = 1.0 / (1.0 + np.exp((params.cut_off - width) * params.spread_gain))
        pc = weight * energy / (sum_amp + _EPS)
        maps.append(np.clip(pc, 0.0, 1.0))
    return maps


def moment_fields(pc_maps, angles):
    """Covariance moments ``a``, ``b``, ``c`` summed over orientations."""
    angles = np.asarray(angles, dtype=np.float64).ravel()
    if len(pc_maps) != angles.size:
        raise ValueError(f"{len(pc_maps)} PC maps but {angles.size} angles")
    check_same_shape(*pc_maps)
    shape = np.shape(pc_maps[0])
    a = np.zeros(shape)
    b = np.zeros(shape)
    c = np.zeros(shape)
    for pc, th in zip(pc_maps, angles):
        pc = np.asarray(pc, dtype=np.float64)
        px = pc * math.cos(th)
        py = pc * math.sin(th)
        a += px * px
        b += px * py
        c += py * py
    return a, 2.0 * b, c


def max_moment(a, b, c) -> np.ndarray:
    """Maximum moment ``(c + a + sqrt(b^2 + (a - c)^2)) / 2``."""
    a, b, c = (np.asarray(x, dtype=np.float64) for x in (a, b, c))
    check_same_shape(a, b, c, names=("a", "b", "c"))
    return 0.5 * (c + a + np.sqrt(b * b + (a - c) ** 2))


def normalize_moment(M) -> np.ndarray:
    """Global min-max rescale to ``[0, 1]``; a constant field maps to zeros."""
    M = np.asarray(M, dtype=np.float64)
    lo = M.min()
    hi = M.max()
    if not hi > lo:
        return np.zeros_like(M)
    return np.clip((M - lo) / (hi - lo), 0.0, 1.0)


def adjust_factor(M_norm, m: int = 2) -> np.ndarray:
    """Diffusion-rate adjust factor ``(1 - M_norm)**m``."""
    if int(m) != m or m < 1:
        raise ValueError(f"power m must be a positive integer, got {m!r}")
    M_norm = np.asarray(M_norm, dtype=np.float64)
    if M_norm.size and (M_norm.min() < 0 or M_norm.max() > 1):
        raise ValueError("M_norm must lie in [0, 1]")
    return (1.0 - M_norm) ** int(m)


def phase_congruency(u, params: PCParams | None = None) -> PCResult:
    """Full phase-congruency analysis of one image."""
    params = params or PCParams()
    maps = oriented_pc(u, params)
    angles = params.angles
    a, b, c = moment_fields(maps, angles)
    M = max_moment(a, b, c)
    return PCResult(maps, angles, a, b, c, M, normalize_moment(M))
