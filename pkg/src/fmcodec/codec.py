"""End-to-end pipelines tying the modules into encode/decode of whole files.

Image path: analyze -> hard_quantize -> (rate control | fixed allocation) ->
mask -> entropy code -> container. Feature path (transform id 255): the same
without a transform, for externally produced FMAP feature sets.

Decoding dispatches on the container's transform_id; containers holding
external features decode to a FeatureMapSet instead of an image.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .bitstream import (
    TRANSFORM_FEATURES,
    ContainerHeader,
    read_container,
    write_container,
)
from .entropy import decode_maps, encode_maps
from .errors import FieldRangeError, FormatError
from .importance import RateControlConfig, mask_set, rate_control, rate_estimate
from .model import (
    CodecParams,
    FeatureMapSet,
    ImageBuffer,
    ImportanceMapSet,
    QuantizedMapSet,
)
from .quantizer import dequantize, hard_quantize
from .transform import TransformConfig, analyze, synthesize

__all__ = ["EncodeResult", "encode_image", "decode_image", "encode_features",
           "decode_features", "decode_blob"]


@dataclass(frozen=True)
class EncodeResult:
    """A finished container plus the bookkeeping callers report."""

    blob: bytes
    header: ContainerHeader
    bpp: float
    unreachable: bool
    iterations: int
    importance_sum: int


def _allocate_and_code(
    feats: FeatureMapSet,
    params: CodecParams,
    pixel_count: int,
    target_bpp: float,
    tolerance: float,
    max_iterations: int,
    fixed_importance: int | None,
):
    q = QuantizedMapSet(hard_quantize(feats.values, params.d))
    if fixed_importance is not None:
        if not 1 <= fixed_importance <= params.d:
            raise ValueError(
                f"fixed_importance must be in 1..{params.d}, got {fixed_importance}"
            )
        imp = ImportanceMapSet(np.full(feats.shape, fixed_importance, dtype=np.uint8))
        payload = encode_maps(mask_set(q, imp, params.d), params)
        return imp, payload, False, 1
    cfg = RateControlConfig(target_bpp, tolerance, max_iterations)
    result = rate_control(feats, q, cfg, params, pixel_count=pixel_count)
    return result.importance, result.payload, result.unreachable, result.iterations


def encode_image(
    img: ImageBuffer,
    *,
    target_bpp: float = 0.15,
    tolerance: float = 0.005,
    max_iterations: int = 20,
    d: int = 4,
    block_size: int = 4,
    transform_id: int = 1,
    kept_coeffs: int = 6,
    fixed_importance: int | None = None,
) -> EncodeResult:
    """Compress an image into a .nfc container."""
    cfg = TransformConfig(transform_id, kept_coeffs)
    feats = analyze(img, cfg)
    params = CodecParams(
        d=d, block_size=block_size, channels=feats.channels, transform_id=transform_id
    )
    imp, payload, unreachable, iterations = _allocate_and_code(
        feats, params, img.width * img.height,
        target_bpp, tolerance, max_iterations, fixed_importance,
    )
    if transform_id == 1:
        padded = (feats.width * 8, feats.height * 8)
        kept = kept_coeffs
    else:
        padded = (img.width, img.height)
        kept = 0
    header = ContainerHeader(
        orig_width=img.width, orig_height=img.height,
        padded_width=padded[0], padded_height=padded[1],
        channels=feats.channels, d=d, block_size=block_size,
        transform_id=transform_id, kept_coeffs=kept,
        payload_len=len(payload),
    )
    blob = write_container(header, payload)
    return EncodeResult(
        blob=blob, header=header,
        bpp=len(blob) * 8 / (img.width * img.height),
        unreachable=unreachable, iterations=iterations,
        importance_sum=rate_estimate(imp),
    )


def encode_features(
    feats: FeatureMapSet,
    *,
    target_bpp: float = 0.15,
    tolerance: float = 0.005,
    max_iterations: int = 20,
    d: int = 4,
    block_size: int = 4,
    fixed_importance: int | None = None,
) -> EncodeResult:
    """Compress an externally produced feature set (transform id 255)."""
    if feats.channels > 255:
        raise FieldRangeError(
            f"container carries at most 255 channels, got {feats.channels}"
        )
    params = CodecParams(
        d=d, block_size=block_size, channels=feats.channels,
        transform_id=TRANSFORM_FEATURES,
    )
    pixel_count = feats.height * feats.width
    imp, payload, unreachable, iterations = _allocate_and_code(
        feats, params, pixel_count,
        target_bpp, tolerance, max_iterations, fixed_importance,
    )
    header = ContainerHeader(
        orig_width=feats.width, orig_height=feats.height,
        padded_width=feats.width, padded_height=feats.height,
        channels=feats.channels, d=d, block_size=block_size,
        transform_id=TRANSFORM_FEATURES, kept_coeffs=0,
        payload_len=len(payload),
    )
    blob = write_container(header, payload)
    return EncodeResult(
        blob=blob, header=header,
        bpp=len(blob) * 8 / pixel_count,
        unreachable=unreachable, iterations=iterations,
        importance_sum=rate_estimate(imp),
    )


def _decode_masked(header: ContainerHeader, payload: bytes) -> FeatureMapSet:
    params = CodecParams(
        d=header.d, block_size=header.block_size,
        channels=header.channels, transform_id=header.transform_id,
    )
    masked = decode_maps(payload, params, header.feature_shape())
    return FeatureMapSet(dequantize(masked.values, header.d))


def decode_blob(blob: bytes) -> tuple[ContainerHeader, Union[ImageBuffer, FeatureMapSet]]:
    """Decode a container into whatever it holds (image or feature set)."""
    header, payload = read_container(blob)
    feats = _decode_masked(header, payload)
    if header.transform_id == TRANSFORM_FEATURES:
        return header, feats
    if header.transform_id == 1:
        cfg = TransformConfig(1, header.kept_coeffs)
    else:
        cfg = TransformConfig(0, 1)
    return header, synthesize(feats, cfg, header.orig_width, header.orig_height)


def decode_image(blob: bytes) -> ImageBuffer:
    """Decode a container that must hold an image."""
    _, decoded = decode_blob(blob)
    if isinstance(decoded, FeatureMapSet):
        raise FormatError("container holds external features, not an image")
    return decoded


def decode_features(blob: bytes) -> FeatureMapSet:
    """Decode a container that must hold external features."""
    _, decoded = decode_blob(blob)
    if isinstance(decoded, ImageBuffer):
        raise FormatError("container holds an image, not external features")
    return decoded
