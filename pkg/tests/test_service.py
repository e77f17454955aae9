"""HTTP service endpoints: happy paths and the error category contract."""

import base64
import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from fmcodec import FeatureMapSet, read_fmap, read_ppm, write_fmap, write_ppm
from fmcodec.service import app

from conftest import synth_image


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def test_health(client):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok" and body["version"]


def test_encode_decode_metrics_loss_pipeline(client):
    img = synth_image(40, 48, 64)
    ppm = write_ppm(img)
    enc = client.post("/v1/encode", json={"ppm_base64": _b64(ppm)})
    assert enc.status_code == 200
    body = enc.json()
    assert body["bpp"] > 0 and body["iterations"] >= 1
    assert (body["orig_width"], body["orig_height"]) == (64, 48)

    dec = client.post("/v1/decode", json={"nfc_base64": body["nfc_base64"]})
    assert dec.status_code == 200
    dbody = dec.json()
    assert dbody["kind"] == "image"
    out = read_ppm(base64.b64decode(dbody["ppm_base64"]))
    assert (out.height, out.width) == (48, 64)

    met = client.post("/v1/metrics", json={
        "ppm_a_base64": _b64(ppm), "ppm_b_base64": dbody["ppm_base64"],
    })
    assert met.status_code == 200
    mbody = met.json()
    assert mbody["sample_count"] == 48 * 64 * 3
    assert mbody["mse"] == pytest.approx(mbody["sum_sq_err"] / mbody["sample_count"])
    assert 0.0 <= mbody["msssim"] <= 1.0

    lv = client.post("/v1/loss", json={
        "mse": mbody["mse"], "msssim": mbody["msssim"],
        "importance_sum": body["importance_sum"],
        "lam": 0.0, "sigma1_sq": 1.0, "sigma2_sq": 1.0, "msssim_term": "literal",
    })
    assert lv.status_code == 200
    expected = mbody["mse"] / 2.0 + mbody["msssim"] / 2.0
    assert lv.json()["loss"] == pytest.approx(expected)


def test_encode_options_are_honored(client):
    img = synth_image(41, 24, 24)
    enc = client.post("/v1/encode", json={
        "ppm_base64": _b64(write_ppm(img)),
        "options": {"transform": 0, "d": 8, "fixed_importance": 8},
    })
    assert enc.status_code == 200
    dec = client.post("/v1/decode", json={"nfc_base64": enc.json()["nfc_base64"]})
    out = read_ppm(base64.b64decode(dec.json()["ppm_base64"]))
    np.testing.assert_array_equal(out.pixels, img.pixels)


def test_features_encode_decode_round_trip(client):
    rng = np.random.default_rng(42)
    feats = FeatureMapSet(rng.random((4, 6, 9), dtype=np.float32) * 0.99)
    enc = client.post("/v1/features/encode", json={
        "fmap_base64": _b64(write_fmap(feats)),
        "options": {"fixed_importance": 4},
    })
    assert enc.status_code == 200
    dec = client.post("/v1/features/decode", json={"nfc_base64": enc.json()["nfc_base64"]})
    assert dec.status_code == 200
    body = dec.json()
    assert body["kind"] == "features"
    assert (body["channels"], body["height"], body["width"]) == (4, 6, 9)
    out = read_fmap(base64.b64decode(body["fmap_base64"]))
    assert out.shape == feats.shape


def test_container_errors_report_container_category(client):
    resp = client.post("/v1/decode", json={"nfc_base64": _b64(b"garbage bytes here")})
    assert resp.status_code == 400
    body = resp.json()
    assert body["category"] == "container"
    assert body["error"] == "BadMagicError"


def test_truncated_container_category(client):
    img = synth_image(43, 16, 16)
    enc = client.post("/v1/encode", json={"ppm_base64": _b64(write_ppm(img))})
    blob = base64.b64decode(enc.json()["nfc_base64"])
    resp = client.post("/v1/decode", json={"nfc_base64": _b64(blob[:-2])})
    assert resp.status_code == 400
    assert resp.json()["category"] == "container"


def test_bad_ppm_reports_format_category(client):
    resp = client.post("/v1/encode", json={"ppm_base64": _b64(b"P6 not really")})
    assert resp.status_code == 400
    assert resp.json()["category"] == "format"


def test_features_decode_of_image_container_is_format_error(client):
    img = synth_image(44, 16, 16)
    enc = client.post("/v1/encode", json={"ppm_base64": _b64(write_ppm(img))})
    resp = client.post("/v1/features/decode",
                       json={"nfc_base64": enc.json()["nfc_base64"]})
    assert resp.status_code == 400
    assert resp.json()["category"] == "format"


def test_invalid_base64_reports_value_category(client):
    resp = client.post("/v1/decode", json={"nfc_base64": "!!! not base64 !!!"})
    assert resp.status_code == 400
    assert resp.json()["category"] == "value"


def test_fixed_importance_above_depth_is_value_error(client):
    img = synth_image(45, 16, 16)
    resp = client.post("/v1/encode", json={
        "ppm_base64": _b64(write_ppm(img)),
        "options": {"d": 4, "fixed_importance": 8},
    })
    assert resp.status_code == 400
    assert resp.json()["category"] == "value"


def test_schema_violations_are_422(client):
    assert client.post("/v1/decode", json={}).status_code == 422
    img = synth_image(46, 16, 16)
    resp = client.post("/v1/encode", json={
        "ppm_base64": _b64(write_ppm(img)),
        "options": {"d": 99},
    })
    assert resp.status_code == 422


def test_unreachable_flag_propagates(client):
    img = synth_image(47, 256, 256)
    enc = client.post("/v1/encode", json={"ppm_base64": _b64(write_ppm(img))})
    body = enc.json()
    assert body["unreachable"] is True
