"""fmcodec: feature-map image codec with importance-driven bit allocation.

Pipeline: a transform maps RGB images to feature maps in [0, 1); uniform
quantization to d bits; a per-sample importance map keeps the m most
significant bitplanes; the masked maps are entropy-coded with a bitplane
significance/refinement scan over an adaptive binary range coder; a small
container frames the payload with everything the decoder needs.
"""

__version__ = "0.1.0"

from .errors import (
    BadMagicError,
    CodecError,
    ContainerError,
    EntropyDecodeError,
    FieldRangeError,
    FormatError,
    LengthMismatchError,
    TruncationError,
    UnsupportedVersionError,
)
from .model import (
    CodecParams,
    FeatureMapSet,
    ImageBuffer,
    ImportanceMapSet,
    MaskedMapSet,
    QuantizedMapSet,
    Violation,
    read_fmap,
    validate,
    write_fmap,
)
from .quantizer import dequantize, hard_quantize, soft_quantize, soft_quantize_grad
from .transform import (
    FEATURE_CEIL,
    TransformConfig,
    analyze,
    denormalize,
    normalize,
    read_ppm,
    round_half_away,
    synthesize,
    write_ppm,
)
from .importance import (
    RateControlConfig,
    RateControlResult,
    apply_mask,
    heuristic_importance,
    mask_set,
    rate_control,
    rate_estimate,
)
from .entropy import (
    ContextModel,
    RangeDecoder,
    RangeEncoder,
    decode_maps,
    encode_maps,
)
from .bitstream import ContainerHeader, HEADER_SIZE, read_container, write_container
from .metrics import LossParams, loss, mse, ms_ssim, psnr_pooled, sse_count
from .codec import (
    EncodeResult,
    decode_blob,
    decode_features,
    decode_image,
    encode_features,
    encode_image,
)

__all__ = [
    "__version__",
    # errors
    "CodecError", "FormatError", "ContainerError", "BadMagicError",
    "UnsupportedVersionError", "TruncationError", "LengthMismatchError",
    "FieldRangeError", "EntropyDecodeError",
    # model
    "ImageBuffer", "FeatureMapSet", "QuantizedMapSet", "ImportanceMapSet",
    "MaskedMapSet", "CodecParams", "Violation", "validate",
    "read_fmap", "write_fmap",
    # quantizer
    "hard_quantize", "dequantize", "soft_quantize", "soft_quantize_grad",
    # transform
    "FEATURE_CEIL", "TransformConfig", "normalize", "denormalize", "analyze",
    "synthesize", "round_half_away", "read_ppm", "write_ppm",
    # importance
    "apply_mask", "mask_set", "rate_estimate", "heuristic_importance",
    "RateControlConfig", "RateControlResult", "rate_control",
    # entropy
    "ContextModel", "RangeEncoder", "RangeDecoder", "encode_maps", "decode_maps",
    # bitstream
    "ContainerHeader", "HEADER_SIZE", "read_container", "write_container",
    # metrics
    "mse", "sse_count", "psnr_pooled", "ms_ssim", "LossParams", "loss",
    # codec
    "EncodeResult", "encode_image", "decode_image", "encode_features",
    "decode_features", "decode_blob",
]
