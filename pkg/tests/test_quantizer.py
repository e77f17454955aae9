"""Uniform quantizer, midpoint dequantizer, and the soft relaxation."""

import numpy as np
import pytest

from fmcodec import dequantize, hard_quantize, soft_quantize, soft_quantize_grad


def test_hard_quantize_scalar_examples():
    assert hard_quantize(0.0, 4) == 0
    assert hard_quantize(0.5, 4) == 8
    assert hard_quantize(1.0 - 2.0 ** -16, 4) == 15
    assert hard_quantize(0.999, 1) == 1
    assert hard_quantize(0.24, 2) == 0


def test_hard_quantize_defensive_clamp():
    # inputs at or above 1 still land on the top cell instead of overflowing
    assert hard_quantize(1.0, 4) == 15
    assert hard_quantize(2.5, 2) == 3


def test_hard_quantize_array_dtype():
    z = np.array([[0.1, 0.6], [0.9, 0.0]], dtype=np.float32)
    q = hard_quantize(z, 2)
    assert q.dtype == np.uint8
    np.testing.assert_array_equal(q, [[0, 2], [3, 0]])


def test_dequantize_midpoints():
    q = np.arange(16, dtype=np.uint8)
    z = dequantize(q, 4)
    assert z.dtype == np.float32
    np.testing.assert_allclose(z, (q + 0.5) / 16.0, rtol=1e-7)


def test_quantize_dequantize_error_bound():
    rng = np.random.default_rng(11)
    for d in (1, 2, 4, 8):
        z = rng.random(20000)
        err = np.abs(dequantize(hard_quantize(z, d), d) - z)
        assert err.max() <= 0.5 / (1 << d) + 1e-7


def test_soft_quantize_frozen_values():
    # softmax-weighted index at two pinned inputs, float64 reference values
    assert soft_quantize(0.5, 1) == pytest.approx(0.7310585786300049, rel=1e-12)
    assert soft_quantize(0.0, 2) == pytest.approx(0.5073472654142303, rel=1e-12)


def test_soft_quantize_range_and_monotonicity():
    z = np.linspace(0.0, 0.999, 4001)
    for d in (1, 2, 4):
        s = soft_quantize(z, d)
        assert s.min() > 0.0 and s.max() < (1 << d) - 1
        assert np.all(np.diff(s) >= 0.0)
        # strictly increasing until the top tail, where every |u - i| grows
        # at the same rate and the weighted index saturates
        interior = z[z < 1.0 - 2.0 ** -d]
        assert np.all(np.diff(soft_quantize(interior, d)) > 0.0)


def test_soft_quantize_saturates_on_top_tail():
    assert soft_quantize(0.6, 1) == pytest.approx(0.7310585786300049, rel=1e-12)
    assert soft_quantize(0.97, 1) == pytest.approx(0.7310585786300049, rel=1e-12)
    assert soft_quantize(0.9999, 4) == pytest.approx(soft_quantize(0.9375, 4), rel=1e-12)


def test_soft_tracks_continuous_index_mid_range():
    # with symmetric exponential weights the soft index follows u = z * 2^d
    # closely once the index distribution is not truncated by the range ends
    for d in (4, 8):
        levels = 1 << d
        z = np.linspace(3.0 / levels, (levels - 3.0) / levels, 500)
        u = z * levels
        assert np.abs(soft_quantize(z, d) - u).max() < 0.25


def test_soft_quantize_grad_matches_finite_differences():
    # the weight kernel exp(-|u - i|) has kinks at integer u; stay off them
    rng = np.random.default_rng(5)
    h = 1e-5
    for d in (1, 2, 4):
        z = rng.uniform(h, 1.0 - h, 200)
        u = z * (1 << d)
        smooth = np.abs(u - np.round(u)) > 100.0 * h * (1 << d)
        z = z[smooth]
        fd = (soft_quantize(z + h, d) - soft_quantize(z - h, d)) / (2.0 * h)
        an = soft_quantize_grad(z, d)
        rel = np.abs(an - fd) / np.maximum(np.abs(fd), 1e-9)
        assert rel.max() < 1e-4


def test_soft_quantize_grad_sign():
    rng = np.random.default_rng(17)
    z = rng.uniform(0.0, 1.0, 2000)
    for d in (1, 2, 4, 8):
        g = soft_quantize_grad(z, d)
        assert np.all(g >= 0.0)
        interior = z < 1.0 - 2.0 ** -d
        assert np.all(g[interior] > 0.0)
