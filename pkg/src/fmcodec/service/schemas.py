"""Request/response models for the HTTP service.

Binary payloads (PPM, FMAP, .nfc) travel base64-encoded inside JSON.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class CodecOptions(BaseModel):
    target_bpp: float = Field(0.15, gt=0)
    tolerance: float = Field(0.005, gt=0)
    max_iterations: int = Field(20, ge=1, le=1000)
    d: int = Field(4, ge=1, le=8)
    block_size: int = Field(4, ge=1, le=255)
    transform: Literal[0, 1] = 1
    kept_coeffs: int = Field(6, ge=1, le=64)
    fixed_importance: Optional[int] = Field(None, ge=1, le=8)


class EncodeImageRequest(BaseModel):
    ppm_base64: str
    options: CodecOptions = CodecOptions()


class EncodeFeaturesRequest(BaseModel):
    fmap_base64: str
    options: CodecOptions = CodecOptions()


class EncodeResponse(BaseModel):
    nfc_base64: str
    bpp: float
    unreachable: bool
    iterations: int
    importance_sum: int
    orig_width: int
    orig_height: int


class DecodeRequest(BaseModel):
    nfc_base64: str


class DecodeResponse(BaseModel):
    kind: Literal["image", "features"]
    ppm_base64: Optional[str] = None
    fmap_base64: Optional[str] = None
    width: int
    height: int
    channels: int


class MetricsRequest(BaseModel):
    ppm_a_base64: str
    ppm_b_base64: str


class MetricsResponse(BaseModel):
    mse: float
    sum_sq_err: float
    sample_count: int
    msssim: float


class LossRequest(BaseModel):
    mse: float
    msssim: float
    importance_sum: float
    lam: float
    sigma1_sq: float = Field(gt=0)
    sigma2_sq: float = Field(gt=0)
    msssim_term: Literal["literal", "one-minus"] = "literal"


class LossResponse(BaseModel):
    loss: float


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorInfo(BaseModel):
    error: str
    category: str
    detail: str
