"""Analysis/synthesis transforms between RGB images and feature maps.

Transform 0 passes the normalized planes straight through (one feature per
pixel per color, fh = H, fw = W, C = 3).  Transform 1 runs an orthonormal
8x8 block cosine transform on each color plane, keeps the first K
coefficients in zigzag order, and interleaves them as channel c = 3*k + color
(fh = ceil(H/8), fw = ceil(W/8), C = 3K, edge-replicated padding).

Both transforms land their values in [0, 1 - 2^-16] through a fixed affine
(value + offset) * scale, so quantization never sees the open bound:
transform 0 uses (n + 1) * 0.5; transform 1 uses (coef + 8) / 16, valid
because |coef| <= 8 for any orthonormal 8x8 transform of inputs in [-1, 1].

Rounding convention for every real-to-integer conversion in this package:
round half away from zero (numpy's np.round is banker's rounding and is not
used on these paths).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .model import FeatureMapSet, ImageBuffer

__all__ = [
    "TransformConfig",
    "FEATURE_CEIL",
    "ZIGZAG",
    "round_half_away",
    "normalize",
    "denormalize",
    "analyze",
    "synthesize",
]

FEATURE_CEIL = 1.0 - 2.0 ** -16

_BLOCK = 8


def _dct_basis(n: int = _BLOCK) -> np.ndarray:
    k = np.arange(n, dtype=np.float64)[:, None]
    t = np.cos(np.pi * (2 * np.arange(n, dtype=np.float64)[None, :] + 1) * k / (2 * n))
    t *= np.sqrt(2.0 / n)
    t[0] *= np.sqrt(0.5)
    return t


_DCT = _dct_basis()


def _zigzag_order(n: int = _BLOCK) -> tuple[tuple[int, int], ...]:
    order = []
    for s in range(2 * n - 1):
        rng = range(max(0, s - n + 1), min(s, n - 1) + 1)
        for u in (reversed(rng) if s % 2 == 0 else rng):
            order.append((u, s - u))
    return tuple(order)


ZIGZAG = _zigzag_order()


def round_half_away(x):
    """Round to nearest integer, halves away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


@dataclass(frozen=True)
class TransformConfig:
    """Analysis/synthesis selection: id 0 identity, id 1 block cosine."""

    transform_id: int = 1
    kept_coeffs: int = 6

    def __post_init__(self):
        if self.transform_id not in (0, 1):
            raise ValueError(f"transform_id must be 0 or 1, got {self.transform_id}")
        if not 1 <= self.kept_coeffs <= 64:
            raise ValueError(f"kept_coeffs must be in 1..64, got {self.kept_coeffs}")

    @property
    def channels(self) -> int:
        return 3 if self.transform_id == 0 else 3 * self.kept_coeffs

    @property
    def coeff_ranges(self) -> np.ndarray:
        """Per-channel (offset, scale) used as feature = (value + offset) * scale."""
        if self.transform_id == 0:
            row = (1.0, 0.5)
        else:
            row = (8.0, 1.0 / 16.0)
        return np.tile(np.asarray(row, dtype=np.float64), (self.channels, 1))


def normalize(img: ImageBuffer) -> np.ndarray:
    """Map pixels to planes shaped (3, H, W) with values in [-1, 1]."""
    return img.pixels.astype(np.float64).transpose(2, 0, 1) / 127.5 - 1.0


def denormalize(planes: np.ndarray) -> ImageBuffer:
    """Inverse of normalize: round half away from zero, clamp to [0, 255]."""
    v = round_half_away((np.asarray(planes, dtype=np.float64) + 1.0) * 127.5)
    v = np.clip(v, 0, 255)
    return ImageBuffer(v.transpose(1, 2, 0).astype(np.uint8))


def _pad_planes(planes: np.ndarray, multiple: int) -> np.ndarray:
    _, h, w = planes.shape
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return planes
    return np.pad(planes, ((0, 0), (0, ph), (0, pw)), mode="edge")


def _clamp_features(values: np.ndarray) -> np.ndarray:
    v = np.clip(values, 0.0, FEATURE_CEIL).astype(np.float32)
    return np.minimum(v, np.float32(FEATURE_CEIL))


def analyze(img: ImageBuffer, cfg: TransformConfig) -> FeatureMapSet:
    """Forward transform into a FeatureMapSet with values in [0, 1)."""
    planes = normalize(img)
    if cfg.transform_id == 0:
        return FeatureMapSet(_clamp_features((planes + 1.0) * 0.5))

    planes = _pad_planes(planes, _BLOCK)
    _, h, w = planes.shape
    bh, bw = h // _BLOCK, w // _BLOCK
    blocks = planes.reshape(3, bh, _BLOCK, bw, _BLOCK).transpose(0, 1, 3, 2, 4)
    coefs = np.einsum("ui,pbwij,vj->pbwuv", _DCT, blocks, _DCT, optimize=True)
    k = cfg.kept_coeffs
    feats = np.empty((3 * k, bh, bw), dtype=np.float64)
    for i in range(k):
        u, v = ZIGZAG[i]
        feats[3 * i:3 * i + 3] = coefs[:, :, :, u, v]
    return FeatureMapSet(_clamp_features((feats + 8.0) / 16.0))


def synthesize(feats: FeatureMapSet, cfg: TransformConfig, width: int, height: int) -> ImageBuffer:
    """Inverse transform; crops replication padding back to width x height."""
    if width < 1 or height < 1:
        raise ValueError(f"target size must be positive, got {width}x{height}")
    z = feats.values.astype(np.float64)

    if cfg.transform_id == 0:
        if feats.channels != 3 or feats.height != height or feats.width != width:
            raise ValueError(
                f"transform 0 expects shape (3, {height}, {width}), got {feats.shape}"
            )
        return denormalize(z * 2.0 - 1.0)

    k = cfg.kept_coeffs
    if feats.channels != 3 * k:
        raise ValueError(f"transform 1 with K={k} expects {3 * k} channels, got {feats.channels}")
    bh, bw = feats.height, feats.width
    if bh * _BLOCK < height or bw * _BLOCK < width:
        raise ValueError(
            f"feature grid {bh}x{bw} cannot cover a {height}x{width} image"
        )
    coefs = np.zeros((3, bh, bw, _BLOCK, _BLOCK), dtype=np.float64)
    for i in range(k):
        u, v = ZIGZAG[i]
        coefs[:, :, :, u, v] = z[3 * i:3 * i + 3] * 16.0 - 8.0
    blocks = np.einsum("iu,pbwuv,jv->pbwij", _DCT.T, coefs, _DCT.T, optimize=True)
    planes = blocks.transpose(0, 1, 3, 2, 4).reshape(3, bh * _BLOCK, bw * _BLOCK)
    return denormalize(planes[:, :height, :width])


def read_ppm(data: bytes) -> ImageBuffer:
    """Parse a binary PPM (P6, maxval 255)."""
    pos = 0
    n = len(data)

    def token() -> bytes:
        nonlocal pos
        while pos < n:
            c = data[pos]
            if c in b"#":
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            elif c in b" \t\r\n\x0b\x0c":
                pos += 1
            else:
                break
        start = pos
        while pos < n and data[pos] not in b" \t\r\n\x0b\x0c#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header")
        return data[start:pos]

    if token() != b"P6":
        raise FormatError("not a P6 PPM file")
    fields = []
    for name in ("width", "height", "maxval"):
        t = token()
        if not t.isdigit():
            raise FormatError(f"malformed PPM {name}: {t!r}")
        fields.append(int(t))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported PPM maxval {maxval} (only 255)")
    if pos >= n or data[pos] not in b" \t\r\n":
        raise FormatError("missing whitespace after PPM maxval")
    pos += 1
    expected = width * height * 3
    body = data[pos:]
    if len(body) < expected:
        raise FormatError(f"short PPM payload: {len(body)} of {expected} bytes")
    if len(body) > expected:
        raise FormatError(f"trailing bytes after PPM payload: {len(body) - expected}")
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer(pixels)


def write_ppm(img: ImageBuffer) -> bytes:
    """Serialize to binary PPM (P6, maxval 255)."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()
