"""8-bit grayscale image I/O (binary PGM and PNG) and atomic file writes."""
from __future__ import annotations

import csv
import io as _io
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

SUPPORTED = {".pgm": "PPM", ".png": "PNG"}


class ImageFormatError(ValueError):
    pass


def _format_for(path: Path) -> str:
    try:
        return SUPPORTED[path.suffix.lower()]
    except KeyError:
        raise ImageFormatError(f"unsupported image format {path.suffix!r} (use .pgm or .png)") from None


def read_image(path) -> np.ndarray:
    """Load an 8-bit grayscale image as a float64 array in ``[0, 255]``."""
    path = Path(path)
    _format_for(path)
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P", "1", "RGB", "RGBA", "LA"):
                raise ImageFormatError(f"{path}: unsupported pixel mode {im.mode}")
            arr = np.asarray(im.convert("L"), dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a readable image") from exc
    return arr


def to_uint8(u) -> np.ndarray:
    """Clamp to ``[0, 255]`` and round half up."""
    return np.floor(np.clip(np.asarray(u, dtype=np.float64), 0.0, 255.0) + 0.5).astype(np.uint8)


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_image(path, u) -> None:
    """Save ``u`` as 8-bit grayscale; the format follows the file extension."""
    path = Path(path)
    fmt = _format_for(path)
    buf = _io.BytesIO()
    Image.fromarray(to_uint8(u), mode="L").save(buf, format=fmt)
    atomic_write_bytes(path, buf.getvalue())


def write_csv(path, header, rows) -> None:
    buf = _io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    atomic_write_text(path, buf.getvalue())
