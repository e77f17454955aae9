"""Domain types: construction guards, immutability, validate(), FMAP I/O."""

import numpy as np
import pytest

from fmcodec import (
    CodecParams,
    FeatureMapSet,
    FormatError,
    ImageBuffer,
    ImportanceMapSet,
    MaskedMapSet,
    QuantizedMapSet,
    read_fmap,
    validate,
    write_fmap,
)
from fmcodec.model import _FMAP_HEADER


def test_image_buffer_shape_and_props():
    img = ImageBuffer(np.zeros((5, 7, 3), dtype=np.uint8))
    assert img.height == 5 and img.width == 7
    assert not img.pixels.flags.writeable


def test_image_buffer_rejects_bad_shapes():
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((5, 7), dtype=np.uint8))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((5, 7, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((0, 7, 3), dtype=np.uint8))


def test_image_buffer_copies_input():
    raw = np.zeros((2, 2, 3), dtype=np.uint8)
    img = ImageBuffer(raw)
    raw[0, 0, 0] = 9
    assert img.pixels[0, 0, 0] == 0


def test_feature_map_set_accepts_half_open_range():
    values = np.array([[[0.0, 0.5, 1.0 - 2.0 ** -16]]], dtype=np.float32)
    feats = FeatureMapSet(values)
    assert feats.shape == (1, 1, 3)
    assert feats.channels == 1 and feats.height == 1 and feats.width == 3


@pytest.mark.parametrize("bad", [1.0, -0.001, np.nan, np.inf])
def test_feature_map_set_rejects_out_of_range(bad):
    values = np.zeros((2, 3, 4), dtype=np.float32)
    values[1, 2, 1] = bad
    with pytest.raises(ValueError) as err:
        FeatureMapSet(values)
    # the first offending coordinate is named
    assert "1" in str(err.value)


def test_map_sets_are_frozen_copies():
    raw = np.ones((1, 2, 2), dtype=np.uint8)
    q = QuantizedMapSet(raw)
    raw[0, 0, 0] = 5
    assert q.values[0, 0, 0] == 1
    assert not q.values.flags.writeable


def test_codec_params_validation():
    CodecParams(d=8, block_size=255, channels=255, transform_id=0)
    with pytest.raises(ValueError):
        CodecParams(d=0, block_size=4, channels=3, transform_id=1)
    with pytest.raises(ValueError):
        CodecParams(d=9, block_size=4, channels=3, transform_id=1)
    with pytest.raises(ValueError):
        CodecParams(d=4, block_size=0, channels=3, transform_id=1)
    with pytest.raises(ValueError):
        CodecParams(d=4, block_size=4, channels=0, transform_id=1)


def test_validate_passes_consistent_sets():
    params = CodecParams(d=4, block_size=4, channels=2, transform_id=1)
    rng = np.random.default_rng(0)
    q = QuantizedMapSet(rng.integers(0, 16, (2, 6, 5), dtype=np.uint8))
    imp = ImportanceMapSet(rng.integers(1, 5, (2, 6, 5), dtype=np.uint8))
    assert validate(q, params) is None
    assert validate(imp, params) is None


def test_validate_reports_first_bad_quantized_sample():
    params = CodecParams(d=2, block_size=4, channels=1, transform_id=1)
    values = np.zeros((1, 3, 3), dtype=np.uint8)
    values[0, 1, 2] = 4  # above 2^2 - 1
    v = validate(QuantizedMapSet(values), params)
    assert v is not None
    assert (v.kind, v.channel, v.y, v.x) == ("index_range", 0, 1, 2)


def test_validate_importance_range():
    params = CodecParams(d=4, block_size=4, channels=1, transform_id=1)
    values = np.full((1, 2, 2), 5, dtype=np.uint8)
    v = validate(ImportanceMapSet(values), params)
    assert v is not None and v.kind == "importance_range"


def test_validate_masked_low_bit_residue():
    params = CodecParams(d=4, block_size=4, channels=1, transform_id=1)
    imp = ImportanceMapSet(np.full((1, 2, 2), 2, dtype=np.uint8))
    ok = MaskedMapSet(np.full((1, 2, 2), 0b1100, dtype=np.uint8))
    assert validate(ok, params, imp) is None
    bad = np.full((1, 2, 2), 0b1100, dtype=np.uint8)
    bad[0, 0, 1] = 0b1101  # keeps a bit below importance 2
    v = validate(MaskedMapSet(bad), params, imp)
    assert v is not None
    assert (v.kind, v.channel, v.y, v.x) == ("mask_residue", 0, 0, 1)


def test_fmap_round_trip():
    rng = np.random.default_rng(3)
    feats = FeatureMapSet(rng.random((5, 7, 11), dtype=np.float32) * 0.999)
    again = read_fmap(write_fmap(feats))
    assert again.shape == feats.shape
    np.testing.assert_array_equal(again.values, feats.values)


def test_fmap_rejects_bad_magic_and_version():
    feats = FeatureMapSet(np.zeros((1, 1, 1), dtype=np.float32))
    blob = bytearray(write_fmap(feats))
    blob[0] = ord("X")
    with pytest.raises(FormatError, match="magic"):
        read_fmap(bytes(blob))
    blob = bytearray(write_fmap(feats))
    blob[4] = 9
    with pytest.raises(FormatError, match="version"):
        read_fmap(bytes(blob))


def test_fmap_rejects_truncation_and_trailing():
    feats = FeatureMapSet(np.zeros((2, 3, 4), dtype=np.float32))
    blob = write_fmap(feats)
    with pytest.raises(FormatError, match="length|truncated"):
        read_fmap(blob[:-1])
    with pytest.raises(FormatError, match="length"):
        read_fmap(blob + b"\x00")
    with pytest.raises(FormatError, match="truncated"):
        read_fmap(blob[:10])


def test_fmap_rejects_zero_dims():
    header = _FMAP_HEADER.pack(b"FMAP", 1, 0, 4, 4)
    with pytest.raises(FormatError, match="shape"):
        read_fmap(header)


def test_fmap_names_bad_value_coordinates():
    feats = FeatureMapSet(np.zeros((1, 2, 2), dtype=np.float32))
    blob = bytearray(write_fmap(feats))
    blob[_FMAP_HEADER.size + 4 * 3:_FMAP_HEADER.size + 4 * 4] = np.float32(1.5).tobytes()
    with pytest.raises(FormatError) as err:
        read_fmap(bytes(blob))
    assert "y=1" in str(err.value) and "x=1" in str(err.value)
