"""Bundled test image.

``lena()`` returns the standard 512x512 8-bit grayscale Lena used in the
denoising literature.  The copy shipped here is the one formerly distributed
as ``scipy/misc/lena.dat`` (scipy <= 0.16); :func:`fetch_lena` regenerates it
from that source distribution if the bundled file is missing.
"""
from __future__ import annotations

import io
import pickle
import tarfile
import urllib.request
from importlib import resources
from pathlib import Path

import numpy as np

from .io import read_image, write_image

_SCIPY_SDIST = (
    "https://files.pythonhosted.org/packages/7b/e1/ecc1820874c396a094e6df30d4d3aa8119d4987c5ff0b9caec73db362849/"
    "scipy-0.16.1.tar.gz"
)
_MEMBER = "scipy-0.16.1/scipy/misc/lena.dat"


class _PlainDataUnpickler(pickle.Unpickler):
    # the payload is nested lists of ints; refuse anything that names a global
    def find_class(self, module, name):
        raise pickle.UnpicklingError(f"refusing to load global {module}.{name}")


def _bundled() -> Path:
    return Path(str(resources.files("mpctv") / "data" / "lena512.pgm"))


def fetch_lena(dest=None, url: str = _SCIPY_SDIST) -> Path:
    """Download the scipy 0.16.1 sdist, extract Lena, and save it as PGM."""
    dest = Path(dest) if dest else _bundled()
    with urllib.request.urlopen(url) as resp:
        blob = resp.read()
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        raw = tar.extractfile(_MEMBER).read()
    rows = _PlainDataUnpickler(io.BytesIO(raw), encoding="latin1").load()
    arr = np.array(rows, dtype=np.float64)
    write_image(dest, arr)
    return dest


def lena() -> np.ndarray:
    path = _bundled()
    if not path.exists():
        fetch_lena(path)
    return read_image(path)
