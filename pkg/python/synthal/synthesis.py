"""
Type-1 / Type-2 copy-paste synthesis

A labeled instrument is resized, moved and rotated, color-matched to the
background, pasted with a soft fusion mask and finally trimmed to the
endoscope vignette. The label is the trimmed transformed mask, so it is
exact regardless of blending.
"""

import logging
from dataclasses import replace
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from . import inpaint
from .config import SynthesisConfig
from .data_types import (
    BackgroundImage, BinaryMask, BlurKind, ColorAdjustParams,
    LabeledImage, RasterImage, SampledParams, SoftMask, SynthType, SyntheticSample,
)
from .errors import (
    DegenerateInput, GenerationFailed, InvalidInput, NoBackgroundAvailable, ShapeError,
)
from .imaging import dilate, fusion_mask, transform, trim
from .rng import derive_seed

logger = logging.getLogger(__name__)

EPSILON = 1e-9

BackgroundLike = Union[BackgroundImage, RasterImage]


def adjust_color_brightness(instrument: RasterImage, background: RasterImage,
                            p: ColorAdjustParams) -> RasterImage:
    """
    Match global color and brightness of the instrument image to the background.

    Per channel: beta * (sum B / sum I) * (alpha * (sum B_c / sum I_c) * I_c + (1 - alpha) * I_c),
    sums taken over every pixel of each image.
    """
    if instrument.frame != background.frame:
        raise ShapeError(f"instrument {instrument.frame} and background {background.frame} differ")
    inst = instrument.data
    back = background.data
    total = inst.sum()
    per_channel = inst.sum(axis=(0, 1))
    if total <= EPSILON or np.any(per_channel <= EPSILON):
        raise DegenerateInput("instrument image is (near) black in at least one channel")

    brightness = back.sum() / total
    color = back.sum(axis=(0, 1)) / per_channel
    out = p.beta * brightness * (p.alpha * color * inst + (1.0 - p.alpha) * inst)
    return RasterImage.clamped(out)


def blend(instrument_adj: RasterImage, background: RasterImage, fusion: SoftMask) -> RasterImage:
    """M_F * I_Ic + (1 - M_F) * I_B, per channel"""
    if not (instrument_adj.frame == background.frame == fusion.frame):
        raise ShapeError(
            f"blend inputs differ: {instrument_adj.frame}, {background.frame}, {fusion.frame}"
        )
    a, b = instrument_adj.data, background.data
    m = fusion.data[..., None]
    out = m * a + (1.0 - m) * b
    # keep every pixel inside [min(a, b), max(a, b)]
    return RasterImage(np.clip(out, np.minimum(a, b), np.maximum(a, b)))


def sample_params(cfg: SynthesisConfig, rng: np.random.Generator) -> SampledParams:
    """Draw one parameter set uniformly from the configured ranges"""
    return SampledParams(
        transform=cfg.sample_transform(rng),
        fusion=cfg.sample_fusion(rng),
        color=cfg.sample_color(rng),
        trim=cfg.sample_trim(rng),
        fusion_enabled=cfg.enabled,
    )


def compose(instrument: RasterImage, mask: BinaryMask, background: RasterImage,
            params: SampledParams) -> Tuple[RasterImage, BinaryMask]:
    """
    Paste an already-transformed instrument onto a background.

    Returns the trimmed image and the label M_Syn. The label only depends on
    the transformed mask and the trim spec.
    """
    if instrument.frame != background.frame:
        raise ShapeError(f"instrument {instrument.frame} and background {background.frame} differ")
    if params.fusion_enabled:
        soft = fusion_mask(dilate(mask, params.fusion.d), params.fusion)
    else:
        soft = SoftMask.from_binary(mask)
    adjusted = adjust_color_brightness(instrument, background, params.color)
    fused = blend(adjusted, background, soft)
    return trim(fused, mask, params.trim)


def _background_parts(background: BackgroundLike) -> Tuple[RasterImage, Optional[str]]:
    if isinstance(background, BackgroundImage):
        return background.image, background.background_id
    return background, None


def _place(instrument: LabeledImage, cfg: SynthesisConfig,
           rng: np.random.Generator) -> Tuple[SampledParams, RasterImage, BinaryMask, int]:
    if instrument.mask.is_empty:
        raise InvalidInput(f"{instrument.image_id}: instrument mask is empty")
    needed = cfg.min_retained * instrument.mask.count
    for attempt in range(1, cfg.max_attempts + 1):
        params = sample_params(cfg, rng)
        image_r, mask_r = transform(instrument.image, instrument.mask, params.transform)
        if mask_r.count > 0 and mask_r.count >= needed:
            return params, image_r, mask_r, attempt
        logger.debug("%s: attempt %d kept %d of %d mask pixels, resampling",
                     instrument.image_id, attempt, mask_r.count, instrument.mask.count)
    raise GenerationFailed(
        f"{instrument.image_id}: instrument left the frame in {cfg.max_attempts} attempts"
    )


def _sample(sample_id: str, image: RasterImage, mask: BinaryMask, params: SampledParams,
            instrument_id: str, background_id: Optional[str], synth_type: SynthType,
            blend_kind: str, seed: int, attempts: int) -> SyntheticSample:
    provenance = {
        "synth_type": synth_type.value,
        "source_instrument_id": instrument_id,
        "source_background_id": background_id,
        "blend_kind": blend_kind,
        "params": params.to_dict(),
        "seed": int(seed),
        "attempts": attempts,
    }
    return SyntheticSample(sample_id=sample_id, image=image, mask=mask, provenance=provenance)


def _blend_kind(params: SampledParams) -> str:
    return params.fusion.blur_kind.value if params.fusion_enabled else "none"


def _generate(instrument: LabeledImage, background: BackgroundLike, cfg: SynthesisConfig,
              seed: int, synth_type: SynthType, sample_id: Optional[str]) -> SyntheticSample:
    back, background_id = _background_parts(background)
    rng = np.random.default_rng(seed)
    params, image_r, mask_r, attempts = _place(instrument, cfg, rng)
    image, mask = compose(image_r, mask_r, back, params)
    sample_id = sample_id or f"{instrument.image_id}_{synth_type.value}"
    return _sample(sample_id, image, mask, params, instrument.image_id, background_id,
                   synth_type, _blend_kind(params), seed, attempts)


def generate_type1(instrument: LabeledImage, background: BackgroundLike, cfg: SynthesisConfig,
                   seed: int, sample_id: Optional[str] = None) -> SyntheticSample:
    """Same instrument as the real image, pasted on a pool background"""
    return _generate(instrument, background, cfg, seed, SynthType.TYPE1, sample_id)


def type2_background(original: LabeledImage, pool: "inpaint.BackgroundPool",
                     cfg: SynthesisConfig, seed: int) -> BackgroundImage:
    """
    Background of the original frame with its instrument removed.

    With inpainting switched off the original background cannot be
    recovered, so a pool background is drawn instead.
    """
    if cfg.background_inpainting:
        return inpaint.acquire_background(original, pool, cfg, seed)
    if len(pool) == 0:
        raise NoBackgroundAvailable(
            f"{original.image_id}: inpainting disabled and background pool is empty"
        )
    rng = np.random.default_rng(seed)
    return pool.draw(rng, frame=original.image.frame)


def generate_type2(original: LabeledImage, donor: LabeledImage,
                   pool: "inpaint.BackgroundPool", cfg: SynthesisConfig, seed: int,
                   sample_id: Optional[str] = None,
                   background: Optional[BackgroundLike] = None) -> SyntheticSample:
    """
    Donor instrument pasted on the original image's inpainted background.

    Pass `background` when the caller already resolved it from the pool.
    """
    if background is None:
        background = type2_background(original, pool, cfg, derive_seed(seed, "background"))
    sample = _generate(donor, background, cfg, seed, SynthType.TYPE2, sample_id)
    sample.provenance["source_original_id"] = original.image_id
    return sample


def multi_blend_pair(instrument: LabeledImage, background: BackgroundLike,
                     cfg: SynthesisConfig, seed: int, synth_type: SynthType = SynthType.TYPE1,
                     sample_id: Optional[str] = None) -> Tuple[SyntheticSample, SyntheticSample]:
    """
    Two composites sharing placement, color and trim; one blended with an
    average kernel and one with a Gaussian, each with its own k.
    """
    back, background_id = _background_parts(background)
    rng = np.random.default_rng(seed)
    params, image_r, mask_r, attempts = _place(instrument, cfg, rng)
    base_id = sample_id or f"{instrument.image_id}_{synth_type.value}"

    pair = []
    for kind in (BlurKind.AVERAGE, BlurKind.GAUSSIAN):
        k = cfg.sample_kernel(rng)
        fused = replace(params, fusion=cfg.fusion_with(params.fusion.d, kind, k))
        image, mask = compose(image_r, mask_r, back, fused)
        pair.append(_sample(f"{base_id}_{kind.value}", image, mask, fused,
                            instrument.image_id, background_id, synth_type,
                            _blend_kind(fused), seed, attempts))
    return pair[0], pair[1]


def synthesize(instrument: LabeledImage, background: BackgroundLike, cfg: SynthesisConfig,
               seed: int, synth_type: SynthType = SynthType.TYPE1,
               sample_id: Optional[str] = None) -> List[SyntheticSample]:
    """One sample, or a multi-blend pair when cfg.multi_blend == 2"""
    if cfg.multi_blend == 2:
        return list(multi_blend_pair(instrument, background, cfg, seed, synth_type, sample_id))
    return [_generate(instrument, background, cfg, seed, synth_type, sample_id)]


def synthesis_counts(rate: float, index: int) -> int:
    """
    Samples to generate for the index-th queried image at a (possibly
    fractional) per-query rate; 0.5 yields one sample every other image.
    """
    if rate < 0 or index < 0:
        raise InvalidInput(f"rate and index must be non-negative, got {rate}, {index}")
    r = Fraction(rate).limit_denominator(10 ** 6)
    return int((r * (index + 1)) // 1 - (r * index) // 1)
