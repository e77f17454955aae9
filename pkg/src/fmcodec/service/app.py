"""FastAPI service exposing the codec pipeline.

Codec failures surface as HTTP 400 with an ErrorInfo body whose ``category``
("container", "format", or "value") lets clients map failures to their own
error handling without parsing message strings.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..codec import decode_blob, encode_features, encode_image
from ..errors import CodecError, ContainerError, FormatError
from ..metrics import LossParams, loss, ms_ssim, sse_count
from ..model import FeatureMapSet, read_fmap, write_fmap
from ..transform import read_ppm, write_ppm
from .schemas import (
    DecodeRequest,
    DecodeResponse,
    EncodeFeaturesRequest,
    EncodeImageRequest,
    EncodeResponse,
    ErrorInfo,
    HealthResponse,
    LossRequest,
    LossResponse,
    MetricsRequest,
    MetricsResponse,
)

app = FastAPI(title="fmcodec", version=__version__)


def _category(exc: Exception) -> str:
    if isinstance(exc, ContainerError):
        return "container"
    if isinstance(exc, FormatError):
        return "format"
    return "value"


@app.exception_handler(CodecError)
async def _codec_error(request: Request, exc: CodecError) -> JSONResponse:
    info = ErrorInfo(error=type(exc).__name__, category=_category(exc), detail=str(exc))
    return JSONResponse(status_code=400, content=info.model_dump())


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
    info = ErrorInfo(error=type(exc).__name__, category="value", detail=str(exc))
    return JSONResponse(status_code=400, content=info.model_dump())


def _b64decode(text: str, what: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValueError(f"invalid base64 in {what}: {exc}") from exc


@app.get("/v1/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/v1/encode", response_model=EncodeResponse)
def encode(req: EncodeImageRequest) -> EncodeResponse:
    img = read_ppm(_b64decode(req.ppm_base64, "ppm_base64"))
    o = req.options
    result = encode_image(
        img,
        target_bpp=o.target_bpp, tolerance=o.tolerance,
        max_iterations=o.max_iterations, d=o.d, block_size=o.block_size,
        transform_id=o.transform, kept_coeffs=o.kept_coeffs,
        fixed_importance=o.fixed_importance,
    )
    return EncodeResponse(
        nfc_base64=base64.b64encode(result.blob).decode("ascii"),
        bpp=result.bpp, unreachable=result.unreachable,
        iterations=result.iterations, importance_sum=result.importance_sum,
        orig_width=img.width, orig_height=img.height,
    )


@app.post("/v1/features/encode", response_model=EncodeResponse)
def features_encode(req: EncodeFeaturesRequest) -> EncodeResponse:
    feats = read_fmap(_b64decode(req.fmap_base64, "fmap_base64"))
    o = req.options
    result = encode_features(
        feats,
        target_bpp=o.target_bpp, tolerance=o.tolerance,
        max_iterations=o.max_iterations, d=o.d, block_size=o.block_size,
        fixed_importance=o.fixed_importance,
    )
    return EncodeResponse(
        nfc_base64=base64.b64encode(result.blob).decode("ascii"),
        bpp=result.bpp, unreachable=result.unreachable,
        iterations=result.iterations, importance_sum=result.importance_sum,
        orig_width=feats.width, orig_height=feats.height,
    )


def _decode_response(blob: bytes) -> DecodeResponse:
    header, decoded = decode_blob(blob)
    if isinstance(decoded, FeatureMapSet):
        return DecodeResponse(
            kind="features",
            fmap_base64=base64.b64encode(write_fmap(decoded)).decode("ascii"),
            width=decoded.width, height=decoded.height, channels=decoded.channels,
        )
    return DecodeResponse(
        kind="image",
        ppm_base64=base64.b64encode(write_ppm(decoded)).decode("ascii"),
        width=decoded.width, height=decoded.height, channels=3,
    )


@app.post("/v1/decode", response_model=DecodeResponse)
def decode(req: DecodeRequest) -> DecodeResponse:
    return _decode_response(_b64decode(req.nfc_base64, "nfc_base64"))


@app.post("/v1/features/decode", response_model=DecodeResponse)
def features_decode(req: DecodeRequest) -> DecodeResponse:
    resp = _decode_response(_b64decode(req.nfc_base64, "nfc_base64"))
    if resp.kind != "features":
        raise FormatError("container holds an image, not external features")
    return resp


@app.post("/v1/metrics", response_model=MetricsResponse)
def metrics(req: MetricsRequest) -> MetricsResponse:
    a = read_ppm(_b64decode(req.ppm_a_base64, "ppm_a_base64"))
    b = read_ppm(_b64decode(req.ppm_b_base64, "ppm_b_base64"))
    sse, n = sse_count(a, b)
    return MetricsResponse(
        mse=sse / n, sum_sq_err=sse, sample_count=n, msssim=ms_ssim(a, b)
    )


@app.post("/v1/loss", response_model=LossResponse)
def loss_endpoint(req: LossRequest) -> LossResponse:
    params = LossParams(
        lam=req.lam, sigma1_sq=req.sigma1_sq, sigma2_sq=req.sigma2_sq,
        msssim_term=req.msssim_term,
    )
    return LossResponse(loss=loss(req.mse, req.msssim, req.importance_sum, params))
