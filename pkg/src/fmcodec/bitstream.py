"""The .nfc container: a fixed header framing the entropy payload.

Layout (all multi-byte fields big-endian, 34 bytes total before payload):

    offset  size  field
    0       4     magic "NFC1"
    4       1     version (0x01)
    5       4     orig_width
    9       4     orig_height
    13      4     padded_width
    17      4     padded_height
    21      1     channels
    22      1     d (bit depth)
    23      1     block_size
    24      1     transform_id (0 identity, 1 block cosine, 255 external features)
    25      1     kept_coeffs (K for transform 1, else 0)
    26      8     payload_len
    34      ...   payload

Reported bpp always counts the full file (header included) against the
original pixel count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import (
    BadMagicError,
    FieldRangeError,
    LengthMismatchError,
    TruncationError,
    UnsupportedVersionError,
)

__all__ = ["ContainerHeader", "HEADER_SIZE", "MAGIC", "VERSION", "TRANSFORM_FEATURES",
           "write_container", "read_container"]

MAGIC = b"NFC1"
VERSION = 1
TRANSFORM_FEATURES = 255

_HEADER = struct.Struct(">4sBIIIIBBBBBQ")
HEADER_SIZE = _HEADER.size  # 34

_U32_MAX = 0xFFFFFFFF


@dataclass(frozen=True)
class ContainerHeader:
    """Decoder-side information carried ahead of the payload."""

    orig_width: int
    orig_height: int
    padded_width: int
    padded_height: int
    channels: int
    d: int
    block_size: int
    transform_id: int
    kept_coeffs: int
    payload_len: int

    def feature_shape(self) -> tuple[int, int, int]:
        """(channels, fh, fw) implied by the transform and padded dims."""
        if self.transform_id == 1:
            return self.channels, self.padded_height // 8, self.padded_width // 8
        return self.channels, self.padded_height, self.padded_width

    @property
    def pixel_count(self) -> int:
        return self.orig_width * self.orig_height


def _check_fields(h: ContainerHeader) -> None:
    for name, value, hi in (
        ("orig_width", h.orig_width, _U32_MAX),
        ("orig_height", h.orig_height, _U32_MAX),
        ("padded_width", h.padded_width, _U32_MAX),
        ("padded_height", h.padded_height, _U32_MAX),
    ):
        if not 1 <= value <= hi:
            raise FieldRangeError(f"{name} must be in 1..{hi}, got {value}")
    if not 1 <= h.channels <= 255:
        raise FieldRangeError(f"channels must be in 1..255, got {h.channels}")
    if not 1 <= h.d <= 8:
        raise FieldRangeError(f"d must be in 1..8, got {h.d}")
    if not 1 <= h.block_size <= 255:
        raise FieldRangeError(f"block_size must be in 1..255, got {h.block_size}")
    if h.transform_id not in (0, 1, TRANSFORM_FEATURES):
        raise FieldRangeError(f"unknown transform_id {h.transform_id}")
    if not 0 <= h.payload_len <= (1 << 64) - 1:
        raise FieldRangeError(f"payload_len out of range: {h.payload_len}")
    if h.padded_width < h.orig_width or h.padded_height < h.orig_height:
        raise FieldRangeError("padded dimensions smaller than original dimensions")
    if h.transform_id == 0:
        if h.kept_coeffs != 0:
            raise FieldRangeError("kept_coeffs must be 0 for transform 0")
        if h.channels != 3:
            raise FieldRangeError(f"transform 0 carries 3 channels, got {h.channels}")
        if (h.padded_width, h.padded_height) != (h.orig_width, h.orig_height):
            raise FieldRangeError("transform 0 does not pad")
    elif h.transform_id == 1:
        if not 1 <= h.kept_coeffs <= 64:
            raise FieldRangeError(f"kept_coeffs must be in 1..64, got {h.kept_coeffs}")
        if h.channels != 3 * h.kept_coeffs:
            raise FieldRangeError(
                f"transform 1 with K={h.kept_coeffs} carries {3 * h.kept_coeffs} "
                f"channels, got {h.channels}"
            )
        if h.padded_width % 8 or h.padded_height % 8:
            raise FieldRangeError("transform 1 padded dimensions must be multiples of 8")
        if h.padded_width - h.orig_width >= 8 or h.padded_height - h.orig_height >= 8:
            raise FieldRangeError("padding must be less than one block")
    else:
        if h.kept_coeffs != 0:
            raise FieldRangeError("kept_coeffs must be 0 for external features")
        if (h.padded_width, h.padded_height) != (h.orig_width, h.orig_height):
            raise FieldRangeError("external features do not pad")


def write_container(header: ContainerHeader, payload: bytes) -> bytes:
    """Serialize header + payload; raises FieldRangeError on bad fields."""
    if header.payload_len != len(payload):
        raise FieldRangeError(
            f"payload_len {header.payload_len} != actual payload size {len(payload)}"
        )
    _check_fields(header)
    packed = _HEADER.pack(
        MAGIC, VERSION,
        header.orig_width, header.orig_height,
        header.padded_width, header.padded_height,
        header.channels, header.d, header.block_size,
        header.transform_id, header.kept_coeffs,
        header.payload_len,
    )
    return packed + payload


def read_container(blob: bytes) -> tuple[ContainerHeader, bytes]:
    """Parse a container; errors are distinct per failure mode."""
    if len(blob) < 4:
        raise TruncationError(f"blob of {len(blob)} bytes cannot hold the magic")
    if blob[:4] != MAGIC:
        raise BadMagicError(f"bad magic {blob[:4]!r}")
    if len(blob) < 5:
        raise TruncationError("blob ends before the version byte")
    if blob[4] != VERSION:
        raise UnsupportedVersionError(f"unsupported container version {blob[4]}")
    if len(blob) < HEADER_SIZE:
        raise TruncationError(f"header needs {HEADER_SIZE} bytes, got {len(blob)}")
    (_, _, ow, oh, pw, ph, channels, d, block_size, transform_id, kept, payload_len,
     ) = _HEADER.unpack_from(blob)
    header = ContainerHeader(
        orig_width=ow, orig_height=oh, padded_width=pw, padded_height=ph,
        channels=channels, d=d, block_size=block_size,
        transform_id=transform_id, kept_coeffs=kept, payload_len=payload_len,
    )
    _check_fields(header)
    total = HEADER_SIZE + payload_len
    if len(blob) < total:
        raise TruncationError(f"payload_len {payload_len} but only {len(blob) - HEADER_SIZE} bytes follow")
    if len(blob) > total:
        raise LengthMismatchError(f"{len(blob) - total} trailing bytes after payload")
    return header, blob[HEADER_SIZE:total]
