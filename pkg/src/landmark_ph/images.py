"""Grayscale image loading (PGM, PNG and anything else Pillow reads)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


class ImageLoadError(OSError):
    pass


def load_gray(path) -> np.ndarray:
    """8-bit grayscale array; colour images go through Pillow's integer luma transform."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                a = np.asarray(im, dtype=np.int64)
                top = a.max() if a.size else 0
                if top > 255:
                    a = a >> max(0, int(top).bit_length() - 8)
                return a.astype(np.uint8)
            if im.mode != "L":
                im = im.convert("L")
            return np.asarray(im, dtype=np.uint8).copy()
    except (OSError, ValueError) as exc:
        raise ImageLoadError(f"cannot load image {path}: {exc}") from exc


def save_gray(path, array) -> None:
    a = np.asarray(array)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array")
    Image.fromarray(np.clip(a, 0, 255).astype(np.uint8), mode="L").save(path)
