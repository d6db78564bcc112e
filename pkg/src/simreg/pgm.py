"""8-bit grayscale image I/O.

Binary PGM (P5) is the canonical format: bit-exact, trivially parseable,
and diffable in reproducibility tests. PNG reading/writing is supported
when Pillow is installed.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    """Unreadable or unsupported image file."""


def quantize(img: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and round to 8-bit levels."""
    return np.clip(np.rint(np.clip(img, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)


def dequantize(raw: np.ndarray) -> np.ndarray:
    return raw.astype(np.float64) / 255.0


def write_pgm(path, img: np.ndarray) -> None:
    raw = quantize(img)
    h, w = raw.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(raw.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ImageFormatError(f"{path}: not a binary PGM (P5) file")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ImageFormatError(f"{path}: only 8-bit PGM supported (maxval={maxval})")
    if len(data) - m.end() < h * w:
        raise ImageFormatError(f"{path}: truncated pixel data")
    pixels = np.frombuffer(data[m.end():], dtype=np.uint8, count=h * w)
    return dequantize(pixels.reshape(h, w))


def read_image(path) -> np.ndarray:
    """Load a grayscale image in [0, 1] from PGM or (with Pillow) PNG."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    try:
        from PIL import Image
    except ImportError as exc:
        raise ImageFormatError(f"{path}: reading {path.suffix} requires Pillow") from exc
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0


def write_image(path, img: np.ndarray) -> None:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        write_pgm(path, img)
        return
    try:
        from PIL import Image
    except ImportError as exc:
        raise ImageFormatError(f"{path}: writing {path.suffix} requires Pillow") from exc
    Image.fromarray(quantize(img), mode="L").save(path)
