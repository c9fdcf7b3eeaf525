from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lesionfusion.color_constancy import (
    ClipPolicy,
    IlluminantEstimate,
    Method,
    NormalizationConfig,
    apply_gains,
    estimate_illuminant,
    minkowski_means,
    normalize_image,
    read_png,
    write_png,
)
from lesionfusion.errors import InvalidConfig, InvalidImage, ZeroChannel

GRAY_WORLD = NormalizationConfig(method="gray_world")
MAX_RGB = NormalizationConfig(method="max_rgb")
TWO_PIXELS = np.array([[[0.2, 0.4, 0.2], [0.4, 0.8, 0.2]]])

headroom_images = arrays(
    np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3)),
    elements=st.floats(0.01, 0.5),
)


def test_uniform_image_estimate():
    img = np.full((3, 4, 3), 0.5)
    for cfg in (GRAY_WORLD, MAX_RGB, NormalizationConfig(p=6)):
        est = estimate_illuminant(img, cfg)
        assert (est.m_r, est.m_g, est.m_b) == pytest.approx((0.5, 0.5, 0.5), abs=1e-15)


def test_two_pixel_gray_world_and_max():
    est = estimate_illuminant(TWO_PIXELS, GRAY_WORLD)
    assert (est.m_r, est.m_g, est.m_b) == pytest.approx((0.3, 0.6, 0.2), abs=1e-15)
    assert est.p == 1
    est = estimate_illuminant(TWO_PIXELS, MAX_RGB)
    assert (est.m_r, est.m_g, est.m_b) == (0.4, 0.8, 0.2)


def test_two_pixel_gains_hand_evaluated():
    # mu = 11/30, gains = mu / (3/10, 3/5, 1/5) = (11/9, 11/18, 11/6)
    mu = (Fraction(3, 10) + Fraction(3, 5) + Fraction(1, 5)) / 3
    gains = [mu / Fraction(3, 10), mu / Fraction(3, 5), mu / Fraction(1, 5)]
    pixel = [Fraction(1, 5) * gains[0], Fraction(2, 5) * gains[1], Fraction(1, 5) * gains[2]]
    est = estimate_illuminant(TWO_PIXELS, GRAY_WORLD)
    out = apply_gains(TWO_PIXELS, est, ClipPolicy.clip_to_one)
    np.testing.assert_allclose(out[0, 0], [float(v) for v in pixel], atol=1e-12)
    np.testing.assert_allclose(out[0, 0], [0.2444, 0.2444, 0.3667], atol=1e-4)
    # second pixel overflows nothing: (0.4889, 0.4889, 0.3667)
    assert out.max() <= 1.0


def test_minkowski_orders_bracket():
    rng = np.random.default_rng(0)
    img = rng.uniform(0.1, 0.9, (8, 8, 3))
    m1, m6, minf = (minkowski_means(img, p) for p in (1, 6, np.inf))
    assert np.all(m1 <= m6) and np.all(m6 <= minf)


def test_zero_channel():
    img = np.zeros((2, 2, 3))
    img[..., 0] = 0.5
    img[..., 1] = 0.3
    with pytest.raises(ZeroChannel, match="b"):
        estimate_illuminant(img)
    with pytest.raises(ZeroChannel):
        apply_gains(img, IlluminantEstimate(0.5, 0.3, 0.0, 6))


@pytest.mark.parametrize("bad", [np.zeros((0, 2, 3)), np.zeros((2, 2)), np.full((1, 1, 3), 1.5)])
def test_invalid_images(bad):
    with pytest.raises(InvalidImage):
        normalize_image(bad)


def test_config_rejects_small_p():
    with pytest.raises(InvalidConfig):
        NormalizationConfig(p=0.5)
    assert NormalizationConfig(method=Method.max_rgb).order == np.inf


@pytest.mark.parametrize("level", [0.0, 0.1, 0.37, 0.5, 1.0])
def test_gray_is_bit_identical_fixed_point(level):
    img = np.full((5, 7, 3), level)
    if level == 0.0:
        with pytest.raises(ZeroChannel):
            normalize_image(img)
        return
    for cfg in (GRAY_WORLD, MAX_RGB, NormalizationConfig()):
        out = normalize_image(img, cfg)
        assert np.array_equal(out, img)


@settings(max_examples=80, deadline=None)
@given(headroom_images)
def test_channel_balance_and_idempotence(img):
    cfg = NormalizationConfig()
    out = normalize_image(img, cfg)
    m = minkowski_means(out, cfg.order)
    assert np.ptp(m) <= 1e-9
    np.testing.assert_allclose(normalize_image(out, cfg), out, rtol=0, atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(headroom_images, st.tuples(*[st.floats(0.3, 1.0)] * 3))
def test_channel_scaling_changes_only_global_level(img, d):
    # normalize(D I) = (mean(D m) / mean(m)) normalize(I): chromaticity is
    # invariant, overall level follows the mean channel gain
    cfg = NormalizationConfig()
    d = np.array(d)
    m = minkowski_means(img, cfg.order)
    factor = np.mean(d * m) / np.mean(m)
    np.testing.assert_allclose(normalize_image(img * d, cfg), factor * normalize_image(img, cfg),
                               rtol=0, atol=1e-9)


def test_clip_policies_keep_range():
    rng = np.random.default_rng(3)
    img = rng.uniform(0, 1, (6, 6, 3))
    img[..., 2] = 0.05
    img[0, 0, 2] = 1.0  # dim blue channel with one bright pixel overflows after gain
    clipped = normalize_image(img, NormalizationConfig("gray_world", clip_policy="clip_to_one"))
    rescaled = normalize_image(
        img, NormalizationConfig("gray_world", clip_policy="rescale_if_overflow"))
    assert clipped.max() == 1.0 and rescaled.max() == pytest.approx(1.0)
    assert clipped.min() >= 0 and rescaled.min() >= 0
    # rescaling is a single global factor, so channel ratios survive
    m = minkowski_means(img, 1)
    raw = img * (np.mean(m) / m)
    np.testing.assert_allclose(rescaled, raw / raw.max(), atol=1e-12)


def test_gamma_round_trip_on_gray():
    img = np.full((2, 2, 3), 0.4)
    out = normalize_image(img, NormalizationConfig(gamma=True))
    np.testing.assert_allclose(out, img, atol=1e-12)


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    k = rng.integers(0, 256, (5, 4, 3))
    img = k / 255.0
    write_png(img, tmp_path / "x.png")
    back = read_png(tmp_path / "x.png")
    assert np.array_equal(np.rint(back * 255).astype(int), k)
    assert np.array_equal(back, img)
