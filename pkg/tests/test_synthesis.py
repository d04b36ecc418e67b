"""
Tests for Type-1 / Type-2 copy-paste synthesis
"""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthal.config import CircleTrimRange, Range
from synthal.data_types import (
    BackgroundImage, BackgroundOrigin, BinaryMask, ColorAdjustParams, LabeledImage,
    RasterImage, SoftMask, TransformParams,
)
from synthal.errors import DegenerateInput, GenerationFailed, InvalidInput, NoBackgroundAvailable
from synthal.imaging import dilate, transform
from synthal.inpaint import BackgroundPool
from synthal.synthesis import (
    adjust_color_brightness, blend, generate_type1, generate_type2, multi_blend_pair,
    synthesis_counts, synthesize,
)


def uniform(value, size=8):
    return RasterImage(np.full((size, size, 3), value))


def test_color_adjust_scalar_example():
    """0.2 instrument on a 0.4 background with alpha=0.5, beta=1 gives 0.6"""
    out = adjust_color_brightness(uniform(0.2), uniform(0.4), ColorAdjustParams(alpha=0.5, beta=1.0))
    assert np.allclose(out.data, 0.6)


def test_color_adjust_equal_sums_is_identity(rng):
    data = rng.uniform(0.1, 0.9, size=(6, 6, 3))
    image = RasterImage(data)
    shuffled = RasterImage(rng.permutation(data.reshape(-1, 3)).reshape(6, 6, 3))
    out = adjust_color_brightness(image, shuffled, ColorAdjustParams(alpha=0.3, beta=1.0))
    assert np.allclose(out.data, data)


def test_color_adjust_black_channel_is_degenerate():
    data = np.full((4, 4, 3), 0.5)
    data[..., 2] = 0.0
    with pytest.raises(DegenerateInput):
        adjust_color_brightness(RasterImage(data), uniform(0.4, 4), ColorAdjustParams())


def test_blend_identities(rng):
    """Fusion 1 gives the instrument, 0 the background, 0.25 a quarter mix"""
    a = RasterImage(rng.uniform(size=(5, 5, 3)))
    b = RasterImage(rng.uniform(size=(5, 5, 3)))
    assert np.array_equal(blend(a, b, SoftMask.ones((5, 5))).data, a.data)
    assert np.array_equal(blend(a, b, SoftMask.zeros((5, 5))).data, b.data)

    quarter = blend(uniform(1.0, 5), uniform(0.0, 5), SoftMask(np.full((5, 5), 0.25)))
    assert np.allclose(quarter.data, 0.25)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_blend_stays_between_inputs(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(size=(6, 7, 3))
    b = rng.uniform(size=(6, 7, 3))
    m = SoftMask(rng.uniform(size=(6, 7)))
    out = blend(RasterImage(a), RasterImage(b), m).data
    assert np.all(out >= np.minimum(a, b))
    assert np.all(out <= np.maximum(a, b))


def test_blend_convex_over_ten_thousand_pixels():
    """10^4 random (instrument, background, mask) triples, mask ends included"""
    rng = np.random.default_rng(2024)
    a = rng.uniform(size=(100, 100, 3))
    b = rng.uniform(size=(100, 100, 3))
    m = rng.uniform(size=(100, 100))
    m[3::11] = 1.0
    m[::7] = 0.0
    b[::13] = a[::13]

    out = blend(RasterImage(a), RasterImage(b), SoftMask(m)).data

    assert np.all(out >= np.minimum(a, b))
    assert np.all(out <= np.maximum(a, b))
    assert np.array_equal(out[::7], b[::7])
    assert np.array_equal(out[::13], a[::13])


def test_type1_label_is_trimmed_transformed_mask(sample, background, toy_config):
    """The label is the instrument mask moved by the recorded params and trimmed"""
    cfg = replace(
        toy_config.synthesis,
        shape="circle",
        trim_circle=CircleTrimRange(Range(16, 16), Range(16, 16), Range(14, 14)),
    )
    out = generate_type1(sample, background, cfg, seed=11)

    p = out.provenance["params"]
    _, moved = transform(sample.image, sample.mask,
                         TransformParams(c=p["c"], w=p["w"], h=p["h"], theta=p["theta"]))
    yy, xx = np.mgrid[0:32, 0:32]
    disc = (xx - 16) ** 2 + (yy - 16) ** 2 <= 14 ** 2
    assert np.array_equal(out.mask.data, moved.data & disc)
    assert np.all(out.image.data[~disc] == 0.0)

    assert out.sample_id == "s000_type1"
    assert out.provenance["synth_type"] == "type1"
    assert out.provenance["source_instrument_id"] == "s000"
    assert out.provenance["seed"] == 11


def test_type1_is_deterministic(sample, background, toy_config):
    cfg = toy_config.synthesis
    first = generate_type1(sample, background, cfg, seed=3)
    second = generate_type1(sample, background, cfg, seed=3)
    other = generate_type1(sample, background, cfg, seed=4)

    assert np.array_equal(first.image.data, second.image.data)
    assert np.array_equal(first.mask.data, second.mask.data)
    assert first.provenance == second.provenance
    assert first.provenance["params"] != other.provenance["params"]


def test_type1_rejects_empty_mask(background, toy_config):
    empty = LabeledImage("blank", background, BinaryMask.zeros(background.frame))
    with pytest.raises(InvalidInput):
        generate_type1(empty, background, toy_config.synthesis, seed=0)


def test_type1_gives_up_when_instrument_leaves_frame(sample, background, toy_config):
    cfg = replace(toy_config.synthesis, move_w=Range(5.0, 5.0), max_attempts=2)
    with pytest.raises(GenerationFailed):
        generate_type1(sample, background, cfg, seed=0)


def test_type1_without_fusion_uses_hard_mask(sample, background, toy_config):
    cfg = replace(toy_config.synthesis, enabled=False)
    out = generate_type1(sample, background, cfg, seed=5)
    assert out.provenance["blend_kind"] == "none"
    outside = ~out.mask.data
    assert np.array_equal(out.image.data[outside], background.data[outside])


def test_type2_without_inpainting_needs_pool(sample, toy_config):
    donor = replace(sample, image_id="donor")
    with pytest.raises(NoBackgroundAvailable):
        generate_type2(sample, donor, BackgroundPool(), toy_config.synthesis, seed=0)


def test_type2_records_original_and_grows_pool(sample, donor, background, toy_config):
    pool = BackgroundPool([BackgroundImage("bg", background, BackgroundOrigin.REAL_EXTERNAL)])
    cfg = replace(toy_config.synthesis, background_inpainting=True)

    out = generate_type2(sample, donor, pool, cfg, seed=9)

    assert out.provenance["synth_type"] == "type2"
    assert out.provenance["source_original_id"] == "s000"
    assert out.provenance["source_instrument_id"] == "d001"
    assert len(pool) == 2
    assert pool.find_inpainted("s000").background_id == out.provenance["source_background_id"]


def mirrored_sample(rng, image_id="s", size=16):
    """Left/right symmetric frame with an instrument near the left edge"""
    half = rng.uniform(0.2, 0.8, size=(size, size // 2, 3))
    data = np.concatenate([half, half[:, ::-1]], axis=1)
    mask = np.zeros((size, size), dtype=bool)
    mask[4:11, 1:5] = True
    return LabeledImage(image_id, RasterImage(data), BinaryMask(mask))


def self_paste_config(toy_config):
    return replace(
        toy_config.synthesis,
        background_inpainting=True,
        resize_ratio=Range(1, 1),
        move_w=Range(0, 0),
        move_h=Range(0, 0),
        rotation_deg=Range(0, 0),
        brightness_beta=Range(1, 1),
        dilation_d=Range(3, 3),
        fusion_k=Range(3, 3),
        shape="none",
        final_blur=(1, 1.0),
    )


def test_type2_of_an_image_onto_itself_reconstructs_it(rng, toy_config):
    """Own instrument, identity placement, no trim: the original frame comes back"""
    s = mirrored_sample(rng)
    cfg = self_paste_config(toy_config)

    out = generate_type2(s, s, BackgroundPool(), cfg, seed=5)

    assert out.provenance["source_background_id"] == "s_flip_h"
    assert np.array_equal(out.mask.data, s.mask.data)
    assert np.allclose(out.image.data, s.image.data, atol=1e-9)


def test_type2_onto_itself_keeps_pixels_away_from_the_instrument(rng, toy_config):
    """Asymmetric tissue: only the blend band around the instrument may change"""
    s = mirrored_sample(rng)
    s = replace(s, image=RasterImage(rng.uniform(0.2, 0.8, size=(16, 16, 3))))
    cfg = self_paste_config(toy_config)

    out = generate_type2(s, s, BackgroundPool(), cfg, seed=5)

    outside = ~dilate(s.mask, 9).data
    assert np.array_equal(out.mask.data, s.mask.data)
    assert np.array_equal(out.image.data[outside], s.image.data[outside])


def test_type2_uses_a_resolved_background(sample, donor, background, toy_config):
    """A background passed in is used as is and the pool stays untouched"""
    pool = BackgroundPool()
    cfg = replace(toy_config.synthesis, background_inpainting=True)
    given_background = BackgroundImage("s000_flip_h", background, BackgroundOrigin.SELF_INPAINTED,
                                       ("s000",))

    out = generate_type2(sample, donor, pool, cfg, seed=9, background=given_background)

    assert out.provenance["source_background_id"] == "s000_flip_h"
    assert out.provenance["source_original_id"] == "s000"
    assert len(pool) == 0


def test_multi_blend_pair_shares_label(sample, background, toy_config):
    """Average and Gaussian variants share placement; only the blend band differs"""
    cfg = replace(toy_config.synthesis, multi_blend=2)
    first, second = multi_blend_pair(sample, background, cfg, seed=21)

    assert first.sample_id == "s000_type1_average"
    assert second.sample_id == "s000_type1_gaussian"
    assert first.provenance["blend_kind"] == "average"
    assert second.provenance["blend_kind"] == "gaussian"
    assert np.array_equal(first.mask.data, second.mask.data)

    changed = np.any(first.image.data != second.image.data, axis=-1)
    reach = dilate(first.mask, 3 + 5 - 1).data
    assert not np.any(changed & ~reach)


def test_multi_blend_unit_kernels_coincide(sample, background, toy_config):
    cfg = replace(toy_config.synthesis, multi_blend=2,
                  dilation_d=Range(1, 1), fusion_k=Range(1, 1))
    first, second = multi_blend_pair(sample, background, cfg, seed=2)
    assert np.array_equal(first.image.data, second.image.data)


def test_synthesize_returns_pair_for_multi_blend(sample, background, toy_config):
    single = synthesize(sample, background, toy_config.synthesis, seed=1)
    pair = synthesize(sample, background, replace(toy_config.synthesis, multi_blend=2), seed=1)
    assert len(single) == 1
    assert len(pair) == 2


def test_synthesis_counts_fractional_rate():
    """Half a sample per query alternates 0, 1"""
    assert [synthesis_counts(0.5, i) for i in range(4)] == [0, 1, 0, 1]
    assert [synthesis_counts(2, i) for i in range(3)] == [2, 2, 2]
    assert sum(synthesis_counts(1 / 3, i) for i in range(9)) == 3
    with pytest.raises(InvalidInput):
        synthesis_counts(-1, 0)
