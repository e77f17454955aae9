"""Importance-driven bit allocation: masking, a heuristic allocator, rate control.

Masking keeps the m most significant of d bitplanes per sample (m in 1..d, so
every sample keeps at least its top bit). The importance maps are never
transmitted; the decoder sees only the masked values.

The heuristic allocator stands in for a trained importance network: local
activity a is the population standard deviation of the 3x3 edge-replicated
neighborhood within each channel, and m = clamp(round(scale * log2(1 + a *
2^d)), 1, d) with round-half-away-from-zero.

Rate control bisects on that scale, measuring the *actual* coded size
(container header included) each pass, never the H(imp) proxy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .bitstream import HEADER_SIZE
from .entropy import encode_maps
from .model import (
    CodecParams,
    FeatureMapSet,
    ImportanceMapSet,
    MaskedMapSet,
    QuantizedMapSet,
)
from .transform import round_half_away

__all__ = [
    "apply_mask",
    "mask_set",
    "rate_estimate",
    "heuristic_importance",
    "RateControlConfig",
    "RateControlResult",
    "rate_control",
]


def apply_mask(q, m, d: int):
    """Zero the (d - m) least significant bits of q: floor(q / 2^(d-m)) * 2^(d-m)."""
    shift = d - np.asarray(m, dtype=np.int64)
    out = (np.asarray(q, dtype=np.int64) >> shift) << shift
    if out.ndim == 0:
        return int(out)
    return out.astype(np.uint8)


def mask_set(q: QuantizedMapSet, imp: ImportanceMapSet, d: int) -> MaskedMapSet:
    """Elementwise apply_mask over whole map sets."""
    if q.shape != imp.shape:
        raise ValueError(f"quantized shape {q.shape} != importance shape {imp.shape}")
    return MaskedMapSet(apply_mask(q.values, imp.values, d))


def rate_estimate(imp: ImportanceMapSet) -> int:
    """H(imp): the sum of all importance values, a bitcount proxy."""
    return int(imp.values.astype(np.int64).sum())


def _activity_bits(feats: FeatureMapSet, d: int) -> np.ndarray:
    """log2(1 + a * 2^d) per sample, a = local 3x3 population std per channel."""
    x = feats.values.astype(np.float64)
    size = (1, 3, 3)  # never mix channels
    mean = ndimage.uniform_filter(x, size=size, mode="nearest")
    mean_sq = ndimage.uniform_filter(x * x, size=size, mode="nearest")
    var = np.maximum(mean_sq - mean * mean, 0.0)
    return np.log2(1.0 + np.sqrt(var) * (1 << d))


def _importance_at(act_bits: np.ndarray, scale: float, d: int) -> np.ndarray:
    m = round_half_away(scale * act_bits)
    return np.clip(m, 1, d).astype(np.uint8)


def heuristic_importance(feats: FeatureMapSet, scale: float, d: int) -> ImportanceMapSet:
    """Activity-driven allocation; scale 0 gives the all-m=1 floor."""
    if scale < 0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    return ImportanceMapSet(_importance_at(_activity_bits(feats, d), scale, d))


@dataclass(frozen=True)
class RateControlConfig:
    """Target rate for the bisection loop; bpp counts the full container."""

    target_bpp: float = 0.15
    tolerance: float = 0.005
    max_iterations: int = 20

    def __post_init__(self):
        if self.target_bpp <= 0:
            raise ValueError(f"target_bpp must be > 0, got {self.target_bpp}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class RateControlResult:
    """Chosen allocation plus the payload already coded for it."""

    importance: ImportanceMapSet
    payload: bytes
    bpp: float
    scale: float
    iterations: int
    unreachable: bool


def rate_control(
    feats: FeatureMapSet,
    q: QuantizedMapSet,
    cfg: RateControlConfig,
    params: CodecParams,
    *,
    pixel_count: int,
) -> RateControlResult:
    """Bisect the allocator scale until the coded bpp meets the target.

    Prefers the largest allocation with bpp <= target; if even the all-m=1
    floor overshoots, returns the floor, flagged unreachable when it misses
    target + tolerance too. Every probe is a real encode (header included in
    the bpp), and the number of encode passes never exceeds max_iterations.
    """
    if pixel_count < 1:
        raise ValueError(f"pixel_count must be >= 1, got {pixel_count}")
    d = params.d
    act_bits = _activity_bits(feats, d)

    def coded(imp_values: np.ndarray) -> tuple[bytes, float]:
        masked = mask_set(q, ImportanceMapSet(imp_values), d)
        payload = encode_maps(masked, params)
        return payload, (HEADER_SIZE + len(payload)) * 8 / pixel_count

    evals = 1
    lo_imp = _importance_at(act_bits, 0.0, d)
    payload, bpp = coded(lo_imp)
    if bpp > cfg.target_bpp:
        unreachable = bpp > cfg.target_bpp + cfg.tolerance
        return RateControlResult(ImportanceMapSet(lo_imp), payload, bpp, 0.0, evals, unreachable)

    best = (0.0, lo_imp, payload, bpp)

    positive = act_bits[act_bits > 1e-12]
    s_hi = float((d - 0.5) / positive.min()) if positive.size else 1.0
    s_hi = min(s_hi, 1e9)
    hi_imp = _importance_at(act_bits, s_hi, d)
    if np.array_equal(hi_imp, lo_imp):
        # allocator saturated at the floor (e.g. constant features)
        return RateControlResult(ImportanceMapSet(lo_imp), payload, bpp, s_hi, evals, False)
    evals += 1
    payload_hi, bpp_hi = coded(hi_imp)
    if bpp_hi <= cfg.target_bpp:
        return RateControlResult(ImportanceMapSet(hi_imp), payload_hi, bpp_hi, s_hi, evals, False)

    lo_scale, hi_scale = 0.0, s_hi
    guard = 0
    while evals < cfg.max_iterations and guard < 10 * cfg.max_iterations:
        guard += 1
        if hi_scale - lo_scale <= 1e-9 * max(1.0, s_hi):
            break
        mid = 0.5 * (lo_scale + hi_scale)
        mid_imp = _importance_at(act_bits, mid, d)
        # skip re-coding when the scale step did not change the allocation
        if np.array_equal(mid_imp, lo_imp):
            lo_scale = mid
            continue
        if np.array_equal(mid_imp, hi_imp):
            hi_scale = mid
            continue
        evals += 1
        payload_mid, bpp_mid = coded(mid_imp)
        if bpp_mid <= cfg.target_bpp:
            lo_scale, lo_imp = mid, mid_imp
            best = (mid, mid_imp, payload_mid, bpp_mid)
        else:
            hi_scale, hi_imp = mid, mid_imp

    scale, imp, payload, bpp = best
    return RateControlResult(ImportanceMapSet(imp), payload, bpp, scale, evals, False)
