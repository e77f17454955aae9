"""Shared value types for the feature-map codec.

Layout convention: every map set stores a C-contiguous ndarray of shape
(channels, height, width).  Flattening therefore yields channel-major order
with rows inside each channel, i.e. index c * (fh * fw) + y * fw + x.  The
entropy coder's scan order and both file formats depend on this exact
linearization; nothing may reorder axes.

Constructors copy their input, freeze it read-only, and reject wrong shapes
or dtypes.  Range checks that depend on the bit depth ``d`` live in
:func:`validate`, which reports the first offending coordinate instead of
raising.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import FormatError

__all__ = [
    "ImageBuffer",
    "FeatureMapSet",
    "QuantizedMapSet",
    "ImportanceMapSet",
    "MaskedMapSet",
    "CodecParams",
    "Violation",
    "validate",
    "read_fmap",
    "write_fmap",
]


def _frozen_array(values, dtype, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype != dtype:
        raise TypeError(f"{name} must have dtype {np.dtype(dtype).name}, got {arr.dtype}")
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 3-d (channels, height, width), got shape {arr.shape}")
    arr = np.array(arr, dtype=dtype, order="C", copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ImageBuffer:
    """8-bit RGB image; pixels shaped (height, width, 3), row-major interleaved."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            raise TypeError(f"pixels must be uint8, got {px.dtype}")
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must be shaped (height, width, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got {px.shape}")
        px = np.array(px, dtype=np.uint8, order="C", copy=True)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


class _MapSetBase:
    """Mixin for the (channels, height, width) map-set dataclasses."""

    values: np.ndarray

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape


@dataclass(frozen=True)
class FeatureMapSet(_MapSetBase):
    """Real-valued feature maps; every value must lie in [0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, np.float32, "feature values")
        if arr.size:
            bad = ~(np.isfinite(arr) & (arr >= 0.0) & (arr < 1.0))
            if bad.any():
                c, y, x = np.argwhere(bad)[0]
                raise ValueError(
                    f"feature value out of [0, 1) at (c={c}, y={y}, x={x}): {arr[c, y, x]!r}"
                )
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class QuantizedMapSet(_MapSetBase):
    """Integer quantization indices, one uint8 per feature sample."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, np.uint8, "quantized values"))


@dataclass(frozen=True)
class ImportanceMapSet(_MapSetBase):
    """Per-sample bitplane budget; values range over 1..d."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, np.uint8, "importance values"))


@dataclass(frozen=True)
class MaskedMapSet(_MapSetBase):
    """Quantization indices after importance masking (low bitplanes zeroed)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, np.uint8, "masked values"))


@dataclass(frozen=True)
class CodecParams:
    """Knobs shared by quantizer, importance masking and entropy coding."""

    d: int = 4
    block_size: int = 4
    channels: int = 16
    transform_id: int = 1

    def __post_init__(self):
        if not 1 <= self.d <= 8:
            raise ValueError(f"d must be in 1..8, got {self.d}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if self.transform_id not in (0, 1, 255):
            raise ValueError(f"unknown transform_id {self.transform_id}")


@dataclass(frozen=True)
class Violation:
    """First invariant breach found by :func:`validate`, with coordinates."""

    kind: str
    channel: int
    y: int
    x: int
    message: str


MapSet = Union[FeatureMapSet, QuantizedMapSet, ImportanceMapSet, MaskedMapSet]


def _first_bad(mask: np.ndarray) -> tuple[int, int, int]:
    c, y, x = np.argwhere(mask)[0]
    return int(c), int(y), int(x)


def validate(
    map_set: MapSet,
    params: CodecParams,
    importance: Optional[ImportanceMapSet] = None,
) -> Optional[Violation]:
    """Check the d-dependent value invariants of ``map_set``.

    Returns ``None`` when everything holds, otherwise a :class:`Violation`
    naming the first offending sample in linearization order.  For a
    :class:`MaskedMapSet`, pass the importance set used for masking to also
    verify that each sample's discarded low bitplanes really are zero.
    """
    v = map_set.values
    d = params.d
    if isinstance(map_set, FeatureMapSet):
        bad = ~(np.isfinite(v) & (v >= 0.0) & (v < 1.0))
        if bad.any():
            c, y, x = _first_bad(bad)
            return Violation("feature_range", c, y, x, f"value {v[c, y, x]!r} outside [0, 1)")
        return None
    if isinstance(map_set, ImportanceMapSet):
        bad = (v < 1) | (v > d)
        if bad.any():
            c, y, x = _first_bad(bad)
            return Violation("importance_range", c, y, x, f"value {v[c, y, x]} outside 1..{d}")
        return None
    # quantized and masked sets share the 2^d bound
    limit = (1 << d) - 1
    bad = v > limit
    if bad.any():
        c, y, x = _first_bad(bad)
        return Violation("index_range", c, y, x, f"value {v[c, y, x]} exceeds 2^{d}-1")
    if isinstance(map_set, MaskedMapSet) and importance is not None:
        if importance.shape != map_set.shape:
            return Violation("shape", -1, -1, -1, "importance shape differs from masked set")
        shift = d - importance.values.astype(np.int16)
        # kept planes are the top m of d; anything below them must be zero
        low = v & ((1 << shift) - 1).astype(np.uint8)
        bad = low != 0
        if bad.any():
            c, y, x = _first_bad(bad)
            return Violation(
                "mask_residue", c, y, x,
                f"value {v[c, y, x]} keeps bits below its importance {importance.values[c, y, x]}",
            )
    return None


# FMAP file format: magic "FMAP", version 0x01, then C, fh, fw as u32
# big-endian, then C*fh*fw float32 little-endian values in (c, y, x) order.

_FMAP_MAGIC = b"FMAP"
_FMAP_VERSION = 1
_FMAP_HEADER = struct.Struct(">4sBIII")


def read_fmap(data: bytes) -> FeatureMapSet:
    """Parse an FMAP blob into a validated FeatureMapSet."""
    if len(data) < _FMAP_HEADER.size:
        raise FormatError(f"FMAP truncated: {len(data)} bytes, header needs {_FMAP_HEADER.size}")
    magic, version, c, fh, fw = _FMAP_HEADER.unpack_from(data)
    if magic != _FMAP_MAGIC:
        raise FormatError(f"bad FMAP magic {magic!r}")
    if version != _FMAP_VERSION:
        raise FormatError(f"unsupported FMAP version {version}")
    if c < 1 or fh < 1 or fw < 1:
        raise FormatError(f"bad FMAP shape ({c}, {fh}, {fw})")
    expected = _FMAP_HEADER.size + 4 * c * fh * fw
    if len(data) != expected:
        raise FormatError(f"FMAP length {len(data)} != expected {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=_FMAP_HEADER.size)
    values = values.astype(np.float32).reshape(c, fh, fw)
    bad = ~(np.isfinite(values) & (values >= 0.0) & (values < 1.0))
    if bad.any():
        ci, y, x = np.argwhere(bad)[0]
        raise FormatError(
            f"FMAP value out of [0, 1) at (c={ci}, y={y}, x={x}): {values[ci, y, x]!r}"
        )
    return FeatureMapSet(values)


def write_fmap(feats: FeatureMapSet) -> bytes:
    """Serialize a FeatureMapSet to FMAP bytes."""
    c, fh, fw = feats.shape
    header = _FMAP_HEADER.pack(_FMAP_MAGIC, _FMAP_VERSION, c, fh, fw)
    return header + feats.values.astype("<f4").tobytes()
