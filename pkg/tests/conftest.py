"""Shared fixtures: a seeded procedural image corpus and JIT warmup.

The corpus stands in for natural photographs: per-channel linear gradients,
a handful of soft gaussian blobs, and a low-pass noise field, min-max
normalized to the full 8-bit range.  Everything is deterministic per seed.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy import ndimage

from fmcodec import CodecParams, ImageBuffer, MaskedMapSet, encode_maps


def synth_image(seed: int, height: int, width: int, noise: float = 0.2) -> ImageBuffer:
    """Deterministic natural-looking test image."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for c in range(3):
        gx, gy = rng.normal(0.0, 1.0, 2)
        img[..., c] = gx * xx / width + gy * yy / height
    dim = max(height, width)
    for _ in range(12):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        r = rng.uniform(min(8.0, dim / 4.0), max(9.0, dim / 3.0))
        amp = rng.normal(0.0, 0.8, 3)
        blob = np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * r * r)))
        img += blob[..., None] * amp
    if noise > 0.0:
        field = ndimage.gaussian_filter(rng.normal(0.0, 1.0, img.shape), (1.5, 1.5, 0))
        img += noise * field
    lo, hi = img.min(), img.max()
    pixels = ((img - lo) / (hi - lo) * 255.0).round().astype(np.uint8)
    return ImageBuffer(pixels)


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    """Compile (or load from cache) the entropy kernels once up front."""
    masked = MaskedMapSet(np.zeros((1, 4, 4), dtype=np.uint8))
    encode_maps(masked, CodecParams(d=1, block_size=4, channels=1, transform_id=0))


@pytest.fixture(scope="session")
def images_512() -> list[ImageBuffer]:
    return [synth_image(seed, 512, 512) for seed in range(10)]


@pytest.fixture(scope="session")
def images_256() -> list[ImageBuffer]:
    return [synth_image(100 + seed, 256, 256) for seed in range(20)]


@pytest.fixture(scope="session")
def images_small() -> list[ImageBuffer]:
    """Twenty small images with awkward, mostly non-multiple-of-8 sizes."""
    rng = np.random.default_rng(7)
    sizes = [(int(rng.integers(9, 97)), int(rng.integers(9, 97))) for _ in range(20)]
    return [synth_image(200 + i, h, w) for i, (h, w) in enumerate(sizes)]
