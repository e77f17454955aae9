"""Quality metrics: MSE, corpus-pooled PSNR, MS-SSIM, and the rate-distortion loss.

PSNR pooling follows the corpus convention: total squared error over total
sample count (all images, all channels) is converted to dB once, rather than
averaging per-image PSNRs.

MS-SSIM is the standard 5-scale formulation, pinned exactly: Gaussian window
size 11 with sd 1.5, 'valid' windowing, scale weights (0.0448, 0.2856,
0.3001, 0.2363, 0.1333), C1 = (0.01*255)^2, C2 = (0.03*255)^2, dyadic
downsampling by 2x2 mean (odd trailing row/column dropped), luminance applied
at the final scale only, computed per color plane and averaged over R, G, B.
Images too small for all 5 scales use as many scales as fit (each needs
min(H, W) >= 11 after halving) with the weights renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import ndimage

from .model import ImageBuffer

__all__ = [
    "mse",
    "sse_count",
    "psnr_pooled",
    "ms_ssim",
    "LossParams",
    "loss",
]

_C1 = (0.01 * 255) ** 2
_C2 = (0.03 * 255) ** 2
_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])
_RADIUS = 5  # window 11


def _gaussian_taps() -> np.ndarray:
    x = np.arange(-_RADIUS, _RADIUS + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * 1.5 * 1.5))
    return g / g.sum()


_TAPS = _gaussian_taps()


def sse_count(a: ImageBuffer, b: ImageBuffer) -> tuple[float, int]:
    """Sum of squared differences and the sample count, for pooling."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float((diff * diff).sum()), int(diff.size)


def mse(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean squared error over all H*W*3 samples on the 8-bit scale."""
    sse, n = sse_count(a, b)
    return sse / n


def psnr_pooled(per_image: Iterable[tuple[float, int]]) -> float:
    """PSNR of the pooled MSE: 10*log10(255^2 / (sum sse / sum n)).

    Returns +inf when the pooled error is exactly zero.
    """
    total_sse = 0.0
    total_n = 0
    for sse, n in per_image:
        if n <= 0:
            raise ValueError(f"sample count must be > 0, got {n}")
        total_sse += sse
        total_n += n
    if total_n == 0:
        raise ValueError("psnr_pooled needs at least one (sse, count) pair")
    if total_sse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / (total_sse / total_n))


def _filter_valid(x: np.ndarray) -> np.ndarray:
    y = ndimage.correlate1d(x, _TAPS, axis=0, mode="constant")
    y = ndimage.correlate1d(y, _TAPS, axis=1, mode="constant")
    return y[_RADIUS:-_RADIUS, _RADIUS:-_RADIUS]


def _downsample(x: np.ndarray) -> np.ndarray:
    h2, w2 = x.shape[0] // 2, x.shape[1] // 2
    return x[: h2 * 2, : w2 * 2].reshape(h2, 2, w2, 2).mean(axis=(1, 3))


def _scale_terms(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    mu_x = _filter_valid(x)
    mu_y = _filter_valid(y)
    var_x = _filter_valid(x * x) - mu_x * mu_x
    var_y = _filter_valid(y * y) - mu_y * mu_y
    cov = _filter_valid(x * y) - mu_x * mu_y
    cs = (2.0 * cov + _C2) / (var_x + var_y + _C2)
    lum = (2.0 * mu_x * mu_y + _C1) / (mu_x * mu_x + mu_y * mu_y + _C1)
    return float(lum.mean()), float(cs.mean())


def _ms_ssim_plane(x: np.ndarray, y: np.ndarray) -> float:
    levels = 0
    dim = min(x.shape)
    while levels < len(_WEIGHTS) and dim >= 2 * _RADIUS + 1:
        levels += 1
        dim //= 2
    if levels == 0:
        raise ValueError(f"image side {min(x.shape)} too small for an 11-tap window")
    weights = _WEIGHTS[:levels] / _WEIGHTS[:levels].sum()
    score = 1.0
    for level in range(levels):
        lum, cs = _scale_terms(x, y)
        if level < levels - 1:
            score *= max(cs, 0.0) ** weights[level]
            x = _downsample(x)
            y = _downsample(y)
        else:
            score *= max(lum * cs, 0.0) ** weights[level]
    return score


def ms_ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """Multi-scale SSIM in [0, 1], averaged over the three color planes."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    pa = a.pixels.astype(np.float64)
    pb = b.pixels.astype(np.float64)
    return float(np.mean([_ms_ssim_plane(pa[:, :, c], pb[:, :, c]) for c in range(3)]))


@dataclass(frozen=True)
class LossParams:
    """Weights of the rate-distortion loss; lam is typically in [0.001, 10]."""

    lam: float
    sigma1_sq: float
    sigma2_sq: float
    msssim_term: str = "literal"

    def __post_init__(self):
        if self.sigma1_sq <= 0 or self.sigma2_sq <= 0:
            raise ValueError("sigma1_sq and sigma2_sq must be > 0")
        if self.msssim_term not in ("literal", "one-minus"):
            raise ValueError(f"msssim_term must be 'literal' or 'one-minus', got {self.msssim_term!r}")


def loss(mse_v: float, msssim_v: float, imp_sum: float, p: LossParams) -> float:
    """lam * H(imp) + MSE/(2 sigma1^2) + S/(2 sigma2^2) + log sigma1^2 + log sigma2^2.

    S is MS-SSIM taken literally by default; the "one-minus" mode substitutes
    (1 - MS-SSIM) so that lower loss means higher similarity. Both are offered
    because the literal form penalizes quality when minimized.
    """
    s = msssim_v if p.msssim_term == "literal" else 1.0 - msssim_v
    return (
        p.lam * imp_sum
        + mse_v / (2.0 * p.sigma1_sq)
        + s / (2.0 * p.sigma2_sq)
        + math.log(p.sigma1_sq)
        + math.log(p.sigma2_sq)
    )
