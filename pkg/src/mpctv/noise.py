"""Seeded noise synthesis: additive Gaussian, multiplicative speckle, salt-and-pepper.

Random draws come from a Philox counter-based generator keyed by the seed, so a
given ``(image, spec)`` pair always produces the same bytes.

Noise strength is given as a variance ``sigma^2`` in 8-bit intensity units.
For speckle and salt-and-pepper two conventions are available:

``unit`` (default)
    ``sigma^2 / 255^2`` is the parameter of the noise on a unit-range image:
    the variance of the uniform multiplicative factor for speckle, the
    corrupted-pixel fraction for salt-and-pepper.
``matched``
    The noise field ``out - in`` is made to have variance ``sigma^2``:
    speckle uses a Gaussian factor with variance ``sigma^2 / mean(u^2)``,
    salt-and-pepper calibrates the density by bisection.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CalibrationError, ConfigError
from .image_core import as_image

KINDS = ("gaussian", "speckle", "salt_pepper")
CONVENTIONS = ("unit", "matched")
FULL_SCALE = 255.0


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "gaussian"
    variance: float | None = None
    density: float | None = None
    seed: int = 0
    convention: str = "unit"

    def __post_init__(self):
        kind = self.kind.replace("-", "_").lower()
        if kind in ("sp", "saltpepper", "salt_and_pepper"):
            kind = "salt_pepper"
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ConfigError(f"kind: unknown noise kind {self.kind!r}")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention: expected one of {CONVENTIONS}, got {self.convention!r}")
        if self.variance is not None and not self.variance >= 0:
            raise ConfigError("variance must be >= 0")
        if self.density is not None and not 0 <= self.density <= 1:
            raise ConfigError("density must be in [0, 1]")
        if kind == "salt_pepper":
            if (self.variance is None) == (self.density is None):
                raise ConfigError("salt_pepper needs exactly one of variance or density")
        elif self.variance is None:
            raise ConfigError(f"{kind} noise needs a variance")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def add_gaussian(u, spec: NoiseSpec) -> np.ndarray:
    """``u + n`` with ``n ~ N(0, variance)`` i.i.d.; not clamped."""
    u = as_image(u)
    if spec.kind != "gaussian":
        raise ConfigError(f"add_gaussian got a {spec.kind} spec")
    n = rng_for(spec.seed).normal(0.0, np.sqrt(spec.variance), size=u.shape)
    return u + n


def add_speckle(u, spec: NoiseSpec) -> np.ndarray:
    """``u + eta * u`` with zero-mean i.i.d. ``eta``; not clamped.

    Raises :class:`CalibrationError` on an all-black image.
    """
    u = as_image(u)
    if spec.kind != "speckle":
        raise ConfigError(f"add_speckle got a {spec.kind} spec")
    power = float(np.mean(u * u))
    if power == 0.0:
        raise CalibrationError("speckle noise is undefined on an all-zero image")
    rng = rng_for(spec.seed)
    if spec.convention == "unit":
        var = spec.variance / FULL_SCALE ** 2
        eta = np.sqrt(12.0 * var) * (rng.random(u.shape) - 0.5)
    else:
        eta = rng.normal(0.0, np.sqrt(spec.variance / power), size=u.shape)
    return u + eta * u


def _apply_salt_pepper(u: np.ndarray, draw: np.ndarray, density: float) -> np.ndarray:
    out = u.copy()
    out[draw < density / 2] = 0.0
    out[(draw >= density / 2) & (draw < density)] = FULL_SCALE
    return out


def calibrate_salt_pepper_density(u, variance: float, seed: int, *, rtol: float = 0.02) -> float:
    """Density whose salt-and-pepper field has sample variance ``variance``.

    Bisection over the density with a fixed uniform draw, so the corrupted set
    grows monotonically with density.
    """
    u = as_image(u)
    draw = rng_for(seed).random(u.shape)

    def field_var(d):
        return float(np.var(_apply_salt_pepper(u, draw, d) - u))

    top = field_var(1.0)
    if variance > top * (1 + rtol):
        raise CalibrationError(
            f"salt-and-pepper variance {variance:g} unreachable; maximum for this image is {top:.6g}"
        )
    if variance == 0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if field_var(mid) < variance:
            lo = mid
        else:
            hi = mid
    d = hi
    if abs(field_var(d) - variance) > rtol * variance:
        raise CalibrationError(f"could not match salt-and-pepper variance {variance:g} within {rtol:.0%}")
    return d


def add_salt_pepper(u, spec: NoiseSpec) -> np.ndarray:
    """Set a random fraction of pixels to 0 or 255 with equal probability."""
    u = as_image(u)
    if spec.kind != "salt_pepper":
        raise ConfigError(f"add_salt_pepper got a {spec.kind} spec")
    if spec.density is not None:
        density = spec.density
    elif spec.convention == "unit":
        density = spec.variance / FULL_SCALE ** 2
        if density > 1:
            raise CalibrationError(f"salt-and-pepper variance {spec.variance:g} exceeds 255^2")
    else:
        density = calibrate_salt_pepper_density(u, spec.variance, spec.seed)
    draw = rng_for(spec.seed).random(u.shape)
    return _apply_salt_pepper(u, draw, density)


def add_noise(u, spec: NoiseSpec) -> np.ndarray:
    return {"gaussian": add_gaussian, "speckle": add_speckle, "salt_pepper": add_salt_pepper}[spec.kind](u, spec)
