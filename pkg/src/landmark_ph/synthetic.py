"""Seeded synthetic images: textured noise, optionally with bright Gaussian blobs."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter


def textured_noise(rng: np.random.Generator, size: int = 64, smooth: float = 1.5,
                   mean: float = 110.0, spread: float = 20.0) -> np.ndarray:
    field = gaussian_filter(rng.normal(size=(size, size)), smooth)
    field = (field - field.mean()) / (field.std() + 1e-12)
    return mean + spread * field


def add_blobs(rng: np.random.Generator, img: np.ndarray, n_blobs: tuple[int, int] = (1, 3),
              amplitude: tuple[float, float] = (120.0, 160.0), radius: tuple[float, float] = (5.0, 9.0)) -> np.ndarray:
    h, w = img.shape
    yy, xx = np.mgrid[0:h, 0:w]
    out = img.copy()
    for _ in range(rng.integers(n_blobs[0], n_blobs[1] + 1)):
        cy, cx = rng.uniform(8, h - 8), rng.uniform(8, w - 8)
        r = rng.uniform(*radius)
        amp = rng.uniform(*amplitude)
        out += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r))
    return out


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def blob_dataset(n_per_class: int = 20, size: int = 64, seed: int = 0) -> tuple[list[np.ndarray], np.ndarray]:
    """``n_per_class`` normal images then ``n_per_class`` abnormal ones; labels 0/1."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for label in (0, 1):
        for _ in range(n_per_class):
            img = textured_noise(rng, size)
            if label:
                img = add_blobs(rng, img)
            images.append(to_uint8(img))
            labels.append(label)
    return images, np.array(labels, dtype=np.int64)
